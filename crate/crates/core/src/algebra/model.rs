use num_complex::Complex64;

use super::BlockOperator;
use crate::error::{Error, Result};

/// One summand `M_n` of the model together with its trace weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// The algebra `⊕ M_{n_i}` with trace `τ(X) = Σ w_i tr(X_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemifiniteModel {
    blocks: Vec<Block>,
}

impl SemifiniteModel {
    pub fn new<I>(blocks: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let blocks: Vec<Block> = blocks
            .into_iter()
            .map(|(dim, weight)| Block { dim, weight })
            .collect();
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("model needs at least one block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::InvalidParameter(format!("block {i} has dimension 0")));
            }
            if !(b.weight.is_finite() && b.weight > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "block {i} has non-positive weight {}",
                    b.weight
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// A model with a single block.
    pub fn single(dim: usize, weight: f64) -> Result<Self> {
        Self::new([(dim, weight)])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.weight).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// `τ(1)`.
    pub fn total_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.dim as f64 * b.weight).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).fold(f64::INFINITY, f64::min)
    }

    /// Same block layout with every dimension multiplied by `factor`.
    pub fn inflate(&self, factor: usize) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    dim: b.dim * factor,
                    weight: b.weight,
                })
                .collect(),
        }
    }

    pub fn check(&self, x: &BlockOperator) -> Result<()> {
        let dims = x.dims();
        if dims.len() != self.blocks.len()
            || dims.iter().zip(&self.blocks).any(|(d, b)| *d != b.dim)
        {
            return Err(Error::Shape(format!(
                "operator blocks {:?} do not match model blocks {:?}",
                dims,
                self.dims()
            )));
        }
        Ok(())
    }

    pub fn identity(&self) -> BlockOperator {
        BlockOperator::identity(&self.dims())
    }

    pub fn zeros(&self) -> BlockOperator {
        BlockOperator::zeros(&self.dims())
    }

    /// `τ(X)`.
    pub fn trace(&self, x: &BlockOperator) -> Result<Complex64> {
        self.check(x)?;
        Ok(self.trace_unchecked(x))
    }

    /// Real part of `τ(X)`; exact for self-adjoint `X`.
    pub fn trace_re(&self, x: &BlockOperator) -> Result<f64> {
        Ok(self.trace(x)?.re)
    }

    pub(crate) fn trace_unchecked(&self, x: &BlockOperator) -> Complex64 {
        self.blocks
            .iter()
            .zip(x.blocks())
            .map(|(b, m)| m.trace() * b.weight)
            .sum()
    }

    /// `τ(XY)` without forming the product.
    pub fn trace_product(&self, x: &BlockOperator, y: &BlockOperator) -> Result<Complex64> {
        self.check(x)?;
        self.check(y)?;
        let mut total = Complex64::new(0.0, 0.0);
        for ((b, xm), ym) in self.blocks.iter().zip(x.blocks()).zip(y.blocks()) {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..b.dim {
                for j in 0..b.dim {
                    s += xm[(i, j)] * ym[(j, i)];
                }
            }
            total += s * b.weight;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Mat;

    #[test]
    fn identity_trace_counts_weighted_dimension() {
        let m = SemifiniteModel::new([(2, 1.0), (1, 0.5)]).unwrap();
        let t = m.trace(&m.identity()).unwrap();
        assert!((t.re - 2.5).abs() < 1e-15 && t.im == 0.0);
    }

    #[test]
    fn projection_trace_uses_weight() {
        let m = SemifiniteModel::single(2, 0.5).unwrap();
        let p = BlockOperator::from_real_diagonal(&[vec![1.0, 0.0]]);
        assert!((m.trace_re(&p).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(SemifiniteModel::new([(0, 1.0)]).is_err());
        assert!(SemifiniteModel::new([(2, 0.0)]).is_err());
        assert!(SemifiniteModel::new([(2, -1.0)]).is_err());
        assert!(SemifiniteModel::new(Vec::<(usize, f64)>::new()).is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = SemifiniteModel::new([(2, 1.0), (1, 0.5)]).unwrap();
        let x = BlockOperator::new(vec![Mat::identity(3, 3)]);
        assert!(matches!(m.trace(&x), Err(Error::Shape(_))));
    }
}
