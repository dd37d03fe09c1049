use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::error::Result;
use crate::Mat;

/// The Pauli matrices `σ₀ = 1, σ₁, σ₂, σ₃`.
pub fn pauli(i: usize) -> Mat {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    match i {
        0 => Mat::from_row_slice(2, 2, &[l, o, o, l]),
        1 => Mat::from_row_slice(2, 2, &[o, l, l, o]),
        2 => Mat::from_row_slice(2, 2, &[o, -j, j, o]),
        3 => Mat::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// `𝒦 = ℂ²⊗ℂ²⊗H`: every block of dimension `n` becomes one of dimension `4n`
/// with the same weight. Tensor factors are ordered as in `σ_a ⊗ σ_b ⊗ X`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedModel {
    base: SemifiniteModel,
    doubled: SemifiniteModel,
    gamma: BlockOperator,
}

impl GradedModel {
    pub fn new(base: SemifiniteModel) -> Self {
        let doubled = base.inflate(4);
        let gamma = Self::lift_with(&pauli(2), &pauli(3), &base.identity()).assume_hermitian();
        Self { base, doubled, gamma }
    }

    fn lift_with(a: &Mat, b: &Mat, x: &BlockOperator) -> BlockOperator {
        x.kron_left(&a.kronecker(b))
    }

    /// `σ_a ⊗ σ_b ⊗ X`.
    pub fn lift(&self, a: usize, b: usize, x: &BlockOperator) -> BlockOperator {
        let out = Self::lift_with(&pauli(a), &pauli(b), x);
        if x.is_selfadjoint() {
            out.assume_hermitian()
        } else {
            out
        }
    }

    pub fn base(&self) -> &SemifiniteModel {
        &self.base
    }

    pub fn doubled(&self) -> &SemifiniteModel {
        &self.doubled
    }

    /// `Γ = σ₂⊗σ₃⊗1`.
    pub fn gamma(&self) -> &BlockOperator {
        &self.gamma
    }

    /// `ρ = σ₂⊗σ₀⊗1`.
    pub fn rho(&self) -> BlockOperator {
        self.lift(2, 0, &self.base.identity())
    }

    /// `Str(a) = τ(Γa) / (2√π)`.
    pub fn supertrace(&self, a: &BlockOperator) -> Result<Complex64> {
        Ok(self.doubled.trace_product(&self.gamma, a)? / (2.0 * PI.sqrt()))
    }
}
