//! Hermitian functional calculus and Fréchet derivatives.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::algebra::BlockOperator;
use crate::error::{Error, Result};
use crate::Mat;

/// Blockwise spectral decomposition `X = U Λ U*` of a self-adjoint operator,
/// eigenvalues ascending within each block.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    values: Vec<Vec<f64>>,
    vectors: Vec<Mat>,
}

fn decompose_block(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

impl EigenDecomposition {
    pub fn new(x: &BlockOperator) -> Result<Self> {
        if !x.is_selfadjoint() {
            return Err(Error::NotSelfAdjoint {
                defect: x.hermitian_defect(),
                norm: x.norm(),
            });
        }
        let mut values = Vec::with_capacity(x.blocks().len());
        let mut vectors = Vec::with_capacity(x.blocks().len());
        for b in x.blocks() {
            let (v, u) = decompose_block(b)?;
            values.push(v);
            vectors.push(u);
        }
        Ok(Self { values, vectors })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn vectors(&self) -> &[Mat] {
        &self.vectors
    }

    /// `U f(Λ) U*` for real `f`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> BlockOperator {
        BlockOperator::hermitian_unchecked(
            self.values
                .iter()
                .zip(&self.vectors)
                .map(|(vals, u)| {
                    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(f(v), 0.0)));
                    scale_columns(u, &d) * u.adjoint()
                })
                .collect(),
        )
    }

    /// `U f(Λ) U*` for complex-valued `f`.
    pub fn apply_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> BlockOperator {
        BlockOperator::new(
            self.values
                .iter()
                .zip(&self.vectors)
                .map(|(vals, u)| {
                    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| f(v)));
                    scale_columns(u, &d) * u.adjoint()
                })
                .collect(),
        )
    }

    /// `U* Y U`.
    pub fn to_eigenbasis(&self, y: &BlockOperator) -> BlockOperator {
        BlockOperator::new(
            self.vectors
                .iter()
                .zip(y.blocks())
                .map(|(u, b)| u.adjoint() * b * u)
                .collect(),
        )
    }

    /// `U Y U*`.
    pub fn from_eigenbasis(&self, y: &BlockOperator) -> BlockOperator {
        BlockOperator::new(
            self.vectors
                .iter()
                .zip(y.blocks())
                .map(|(u, b)| u * b * u.adjoint())
                .collect(),
        )
    }

    /// `Σ w_i f(λ)` over all eigenvalues, i.e. `τ(f(X))`.
    pub fn trace_of<F: Fn(f64) -> f64>(&self, weights: &[f64], f: F) -> f64 {
        self.values
            .iter()
            .zip(weights)
            .map(|(vals, w)| w * vals.iter().map(|&v| f(v)).sum::<f64>())
            .sum()
    }

    /// `Re τ(Y g(X))`, using only the diagonal of `Y` in the eigenbasis.
    pub fn trace_with<G: Fn(f64) -> f64>(&self, weights: &[f64], y: &BlockOperator, g: G) -> f64 {
        let mut total = 0.0;
        for (((vals, u), w), yb) in self.values.iter().zip(&self.vectors).zip(weights).zip(y.blocks()) {
            let yu = yb * u;
            let mut s = 0.0;
            for (i, &v) in vals.iter().enumerate() {
                let gv = g(v);
                if gv == 0.0 {
                    continue;
                }
                let d: Complex64 = u.column(i).iter().zip(yu.column(i).iter()).map(|(a, b)| a.conj() * b).sum();
                s += d.re * gv;
            }
            total += w * s;
        }
        total
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn scale_columns(u: &Mat, d: &DVector<Complex64>) -> Mat {
    let mut out = u.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

/// `f(X)` for self-adjoint `X` and real `f`.
pub fn func_calc<F: Fn(f64) -> f64>(x: &BlockOperator, f: F) -> Result<BlockOperator> {
    Ok(EigenDecomposition::new(x)?.apply(f))
}

/// First divided difference `f[a, b]`, switching to the midpoint derivative
/// when the nodes nearly coincide.
pub fn first_divided_difference<F, G>(f: &F, df: &G, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if (a - b).abs() <= 1e-5 * (1.0 + a.abs().max(b.abs())) {
        df(0.5 * (a + b))
    } else {
        (f(a) - f(b)) / (a - b)
    }
}

/// `d/ds f(X + s dX)` at `s = 0` (Daleckiĭ–Kreĭn): in the eigenbasis of `X`
/// the derivative is the Schur product of `dX` with `f[λ_i, λ_j]`.
pub fn frechet_derivative<F, G>(x: &BlockOperator, dx: &BlockOperator, f: F, df: G) -> Result<BlockOperator>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let eig = EigenDecomposition::new(x)?;
    Ok(frechet_with(&eig, dx, &f, &df, dx.is_selfadjoint()))
}

/// [`frechet_derivative`] reusing a decomposition of `X`.
pub fn frechet_with<F, G>(eig: &EigenDecomposition, dx: &BlockOperator, f: &F, df: &G, hermitian: bool) -> BlockOperator
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut t = eig.to_eigenbasis(dx).into_blocks();
    for (m, vals) in t.iter_mut().zip(eig.values()) {
        let n = vals.len();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] *= first_divided_difference(f, df, vals[i], vals[j]);
            }
        }
    }
    let out = eig.from_eigenbasis(&BlockOperator::new(t));
    if hermitian {
        out.assume_hermitian()
    } else {
        out
    }
}
