//! Seeded random instances: Hermitian operators, unitaries, projections.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::Mat;

/// Deterministic generator; a seed fixes every draw.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    fn gaussian_matrix(&mut self, n: usize) -> Mat {
        Mat::from_fn(n, n, |_, _| Complex64::new(self.normal(), self.normal()))
    }

    /// Complex Gaussian matrix per block with entries of variance `scale²`.
    pub fn complex(&mut self, model: &SemifiniteModel, scale: f64) -> BlockOperator {
        let blocks = model
            .dims()
            .into_iter()
            .map(|n| self.gaussian_matrix(n) * Complex64::new(scale / 2f64.sqrt(), 0.0))
            .collect();
        BlockOperator::new(blocks)
    }

    /// Self-adjoint operator `scale·(G+G*)/(2√n)`, so the spectrum is of order `scale`.
    pub fn hermitian(&mut self, model: &SemifiniteModel, scale: f64) -> BlockOperator {
        let blocks = model
            .dims()
            .into_iter()
            .map(|n| {
                let g = self.gaussian_matrix(n);
                (&g + g.adjoint()) * Complex64::new(scale / (2.0 * (2.0 * n as f64).sqrt()), 0.0)
            })
            .collect();
        BlockOperator::hermitian_unchecked(blocks)
    }

    fn haar_block(&mut self, n: usize) -> Mat {
        let qr = self.gaussian_matrix(n).qr();
        let (q, r) = (qr.q(), qr.r());
        let mut q = q;
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    /// Haar-random unitary in the model.
    pub fn unitary(&mut self, model: &SemifiniteModel) -> BlockOperator {
        let blocks = model.dims().into_iter().map(|n| self.haar_block(n)).collect();
        BlockOperator::new(blocks)
    }

    /// `U diag(spectrum) U*` with `U` Haar-random.
    pub fn with_spectrum(&mut self, spectra: &[Vec<f64>]) -> BlockOperator {
        let d = BlockOperator::from_real_diagonal(spectra);
        let blocks = spectra.iter().map(|s| self.haar_block(s.len())).collect();
        BlockOperator::new(blocks).sandwich(&d)
    }

    /// Random projection with the given rank in each block.
    pub fn projection_with_ranks(&mut self, model: &SemifiniteModel, ranks: &[usize]) -> BlockOperator {
        let spectra: Vec<Vec<f64>> = model
            .dims()
            .iter()
            .zip(ranks)
            .map(|(&n, &k)| (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect())
            .collect();
        self.with_spectrum(&spectra)
    }

    /// Random projection with uniformly drawn ranks.
    pub fn projection(&mut self, model: &SemifiniteModel) -> BlockOperator {
        let ranks: Vec<usize> = model.dims().iter().map(|&n| self.index(n + 1)).collect();
        self.projection_with_ranks(model, &ranks)
    }

    /// Self-adjoint operator with eigenvalues uniform in `[lo, hi]`, kept at
    /// least `gap` away from zero.
    pub fn gapped_hermitian(&mut self, model: &SemifiniteModel, lo: f64, hi: f64, gap: f64) -> BlockOperator {
        let spectra: Vec<Vec<f64>> = model
            .dims()
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|_| loop {
                        let v = self.uniform(lo, hi);
                        if v.abs() >= gap {
                            break v;
                        }
                    })
                    .collect()
            })
            .collect();
        self.with_spectrum(&spectra)
    }

    /// Random block layout with `total` dimensions spread over `blocks`
    /// blocks and weights in `[0.2, 1.5]`.
    pub fn model(&mut self, total: usize, blocks: usize) -> SemifiniteModel {
        assert!(blocks >= 1 && blocks <= total);
        let mut dims = vec![1usize; blocks];
        for _ in blocks..total {
            let i = self.index(blocks);
            dims[i] += 1;
        }
        let layout: Vec<(usize, f64)> = dims
            .into_iter()
            .map(|d| (d, (self.uniform(0.2, 1.5) * 100.0).round() / 100.0))
            .collect();
        SemifiniteModel::new(layout).expect("valid layout")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible() {
        let m = SemifiniteModel::new([(3, 1.0), (2, 0.5)]).unwrap();
        let a = Sampler::new(11).hermitian(&m, 1.0);
        let b = Sampler::new(11).hermitian(&m, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn unitaries_and_projections() {
        let m = SemifiniteModel::new([(4, 1.0), (3, 0.5)]).unwrap();
        let mut s = Sampler::new(5);
        let u = s.unitary(&m);
        assert!(u.unitary_defect() < 1e-13);
        let p = s.projection_with_ranks(&m, &[2, 1]);
        assert!(p.projection_defect() < 1e-13);
        assert!((m.trace_re(&p).unwrap() - 2.5).abs() < 1e-13);
    }
}
