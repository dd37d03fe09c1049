use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::HERMITIAN_REPAIR_TOL;
use crate::error::{Error, Result};
use crate::Mat;

/// A block-diagonal complex matrix.
///
/// Arithmetic between operators of different block shapes panics, the same
/// way nalgebra does for mismatched matrices; model-level entry points check
/// shapes and return [`Error::Shape`] instead.
///
/// When the self-adjoint flag is set the blocks are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<Mat>,
    selfadjoint: bool,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn symmetrize(m: &Mat) -> Mat {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = c(m[(i, i)].re);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

fn spectral_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

impl BlockOperator {
    /// A general (not necessarily self-adjoint) operator.
    pub fn new(blocks: Vec<Mat>) -> Self {
        for b in &blocks {
            assert_eq!(b.nrows(), b.ncols(), "blocks must be square");
        }
        Self {
            blocks,
            selfadjoint: false,
        }
    }

    /// A self-adjoint operator. Inputs within `1e-9·‖X‖` of Hermitian are
    /// replaced by `(X+X*)/2`; larger defects are an error.
    pub fn hermitian(blocks: Vec<Mat>) -> Result<Self> {
        Self::new(blocks).into_hermitian()
    }

    /// Symmetrizes unconditionally. Used where the operator is Hermitian
    /// by construction up to rounding.
    pub(crate) fn hermitian_unchecked(blocks: Vec<Mat>) -> Self {
        Self {
            blocks: blocks.iter().map(symmetrize).collect(),
            selfadjoint: true,
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self {
            blocks: dims.iter().map(|&d| Mat::identity(d, d)).collect(),
            selfadjoint: true,
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            blocks: dims.iter().map(|&d| Mat::zeros(d, d)).collect(),
            selfadjoint: true,
        }
    }

    /// Self-adjoint diagonal operator with the given real diagonals.
    pub fn from_real_diagonal(diagonals: &[Vec<f64>]) -> Self {
        let blocks = diagonals
            .iter()
            .map(|d| {
                let n = d.len();
                Mat::from_fn(n, n, |i, j| if i == j { c(d[i]) } else { c(0.0) })
            })
            .collect();
        Self {
            blocks,
            selfadjoint: true,
        }
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Mat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<Mat> {
        self.blocks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    /// `‖X − X*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| spectral_norm(&(b - b.adjoint())))
            .fold(0.0, f64::max)
    }

    /// Checks the Hermitian defect and symmetrizes.
    pub fn into_hermitian(self) -> Result<Self> {
        if self.selfadjoint {
            return Ok(self);
        }
        let defect = self.hermitian_defect();
        let norm = self.norm();
        if defect > HERMITIAN_REPAIR_TOL * norm.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::NotSelfAdjoint { defect, norm });
        }
        Ok(Self::hermitian_unchecked(self.blocks))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            selfadjoint: self.selfadjoint,
        }
    }

    /// Operator norm `‖X‖`.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// `‖X − Y‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * c(s)).collect(),
            selfadjoint: self.selfadjoint,
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * s).collect(),
            selfadjoint: self.selfadjoint && s.im == 0.0,
        }
    }

    /// `XY − YX`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `XY + YX`; self-adjoint when both factors are.
    pub fn anticommutator(&self, other: &Self) -> Self {
        let sum = &(self * other) + &(other * self);
        if self.selfadjoint && other.selfadjoint {
            Self::hermitian_unchecked(sum.blocks)
        } else {
            sum
        }
    }

    /// `X Y X*`, self-adjoint when `Y` is.
    pub fn sandwich(&self, middle: &Self) -> Self {
        let out = &(self * middle) * &self.adjoint();
        if middle.selfadjoint {
            Self::hermitian_unchecked(out.blocks)
        } else {
            out
        }
    }

    /// Applies a matrix map blockwise. The result is treated as general.
    pub fn map_blocks<F>(&self, f: F) -> Self
    where
        F: Fn(&Mat) -> Mat,
    {
        Self::new(self.blocks.iter().map(f).collect())
    }

    /// Blockwise Kronecker product `K ⊗ X_i`.
    pub fn kron_left(&self, k: &Mat) -> Self {
        Self::new(self.blocks.iter().map(|b| k.kronecker(b)).collect())
    }

    /// Marks the result of a computation that is Hermitian in exact arithmetic.
    pub fn assume_hermitian(self) -> Self {
        Self::hermitian_unchecked(self.blocks)
    }

    /// `‖X* X − 1‖`.
    pub fn unitary_defect(&self) -> f64 {
        let id = Self::identity(&self.dims());
        (&(&self.adjoint() * self) - &id).norm()
    }

    /// `max(‖P² − P‖, ‖P − P*‖)`.
    pub fn projection_defect(&self) -> f64 {
        let sq = self * self;
        (&sq - self).norm().max(self.hermitian_defect())
    }

    fn zip_with<F>(&self, other: &Self, f: F) -> Vec<Mat>
    where
        F: Fn(&Mat, &Mat) -> Mat,
    {
        assert_eq!(self.dims(), other.dims(), "block shapes differ");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect()
    }
}

impl Add for &BlockOperator {
    type Output = BlockOperator;
    fn add(self, rhs: &BlockOperator) -> BlockOperator {
        BlockOperator {
            blocks: self.zip_with(rhs, |a, b| a + b),
            selfadjoint: self.selfadjoint && rhs.selfadjoint,
        }
    }
}

impl Sub for &BlockOperator {
    type Output = BlockOperator;
    fn sub(self, rhs: &BlockOperator) -> BlockOperator {
        BlockOperator {
            blocks: self.zip_with(rhs, |a, b| a - b),
            selfadjoint: self.selfadjoint && rhs.selfadjoint,
        }
    }
}

impl Mul for &BlockOperator {
    type Output = BlockOperator;
    fn mul(self, rhs: &BlockOperator) -> BlockOperator {
        BlockOperator::new(self.zip_with(rhs, |a, b| a * b))
    }
}

impl Neg for &BlockOperator {
    type Output = BlockOperator;
    fn neg(self) -> BlockOperator {
        BlockOperator {
            blocks: self.blocks.iter().map(|b| -b).collect(),
            selfadjoint: self.selfadjoint,
        }
    }
}

impl From<DMatrix<Complex64>> for BlockOperator {
    fn from(m: DMatrix<Complex64>) -> Self {
        BlockOperator::new(vec![m])
    }
}
