use num_complex::Complex64;

use super::graded::{pauli, GradedModel};
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::error::{Error, Result};
use crate::Mat;

/// The two-parameter family `D_{r,s} = (1−r)D₀ − r q̂D₀q̂ + s q̂` on the doubled
/// space, built from a self-adjoint `D` and a unitary `u` on the base.
#[derive(Clone, Debug)]
pub struct SuperconnectionFamily {
    graded: GradedModel,
    d: BlockOperator,
    u: BlockOperator,
    d0: BlockOperator,
    qhat: BlockOperator,
    qd0q: BlockOperator,
    anticommutator: BlockOperator,
}

/// Residuals of the algebraic identities the family satisfies by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyChecks {
    /// `‖q̂² − 1‖`.
    pub qhat_square: f64,
    /// `‖q̂ − q̂*‖`.
    pub qhat_hermitian: f64,
    /// `‖D₀q̂ + q̂D₀ − σ₁⊗[[0,[D,u⁻¹]],[−[D,u],0]]‖`.
    pub anticommutator: f64,
    /// `‖D_{r,s}² − D_r² − s(1−2r)[D₀,q̂]₊ − s²‖` at the supplied `(r, s)`.
    pub square: f64,
}

fn two_by_two(entries: [&Mat; 4]) -> Mat {
    let n = entries[0].nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (k, e) in entries.iter().enumerate() {
        m.view_mut(((k / 2) * n, (k % 2) * n), (n, n)).copy_from(e);
    }
    m
}

impl SuperconnectionFamily {
    pub fn new(model: &SemifiniteModel, d: &BlockOperator, u: &BlockOperator) -> Result<Self> {
        model.check(d)?;
        model.check(u)?;
        if !d.is_selfadjoint() {
            return Err(Error::NotSelfAdjoint {
                defect: d.hermitian_defect(),
                norm: d.norm(),
            });
        }
        let defect = u.unitary_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!("u is not unitary (defect {defect:.3e})")));
        }
        let graded = GradedModel::new(model.clone());
        let d0 = graded.lift(2, 0, d);
        let i = Complex64::new(0.0, 1.0);
        let s3 = pauli(3);
        let qhat = BlockOperator::new(
            u.blocks()
                .iter()
                .map(|ub| {
                    let z = Mat::zeros(ub.nrows(), ub.ncols());
                    let w = two_by_two([&z, &(ub.adjoint() * -i), &(ub * i), &z]);
                    s3.kronecker(&w)
                })
                .collect(),
        )
        .assume_hermitian();
        let qd0q = (&(&qhat * &d0) * &qhat).assume_hermitian();
        let anticommutator = d0.anticommutator(&qhat);
        Ok(Self {
            graded,
            d: d.clone(),
            u: u.clone(),
            d0,
            qhat,
            qd0q,
            anticommutator,
        })
    }

    pub fn graded(&self) -> &GradedModel {
        &self.graded
    }

    pub fn base_model(&self) -> &SemifiniteModel {
        self.graded.base()
    }

    pub fn d(&self) -> &BlockOperator {
        &self.d
    }

    pub fn u(&self) -> &BlockOperator {
        &self.u
    }

    /// The same family with `u` replaced by `u⁻¹`.
    pub fn inverted(&self) -> Result<Self> {
        Self::new(self.graded.base(), &self.d, &self.u.adjoint())
    }

    /// `D₀ = σ₂⊗σ₀⊗D`.
    pub fn d0(&self) -> &BlockOperator {
        &self.d0
    }

    /// `q̂ = σ₃⊗[[0, −iu⁻¹], [iu, 0]]`.
    pub fn qhat(&self) -> &BlockOperator {
        &self.qhat
    }

    /// `[D₀, q̂]₊`.
    pub fn anticommutator(&self) -> &BlockOperator {
        &self.anticommutator
    }

    /// `D_r = (1−r)D₀ − r q̂D₀q̂`.
    pub fn d_r(&self, r: f64) -> BlockOperator {
        &self.d0.scale(1.0 - r) - &self.qd0q.scale(r)
    }

    /// `dD_r/dr = −D₀ − q̂D₀q̂`.
    pub fn d_r_dot(&self) -> BlockOperator {
        -&(&self.d0 + &self.qd0q)
    }

    /// `D_{r,s} = D_r + s q̂`.
    pub fn d_rs(&self, r: f64, s: f64) -> BlockOperator {
        &self.d_r(r) + &self.qhat.scale(s)
    }

    /// `[D, u]`.
    pub fn commutator_u(&self) -> BlockOperator {
        self.d.commutator(&self.u)
    }

    /// `[D, u⁻¹]`.
    pub fn commutator_u_inv(&self) -> BlockOperator {
        self.d.commutator(&self.u.adjoint())
    }

    /// Checks the defining identities at parameters `(r, s)`.
    pub fn checks(&self, r: f64, s: f64) -> FamilyChecks {
        let id = self.graded.doubled().identity();
        let qhat_square = (&(&self.qhat * &self.qhat) - &id).norm();
        let qhat_hermitian = BlockOperator::new(self.qhat.blocks().to_vec()).hermitian_defect();
        let du = self.commutator_u();
        let dui = self.commutator_u_inv();
        let expected = BlockOperator::new(
            du.blocks()
                .iter()
                .zip(dui.blocks())
                .map(|(a, b)| {
                    let z = Mat::zeros(a.nrows(), a.ncols());
                    pauli(1).kronecker(&two_by_two([&z, b, &(-a), &z]))
                })
                .collect(),
        );
        let anticommutator = self.anticommutator.distance(&expected);
        let drs = self.d_rs(r, s);
        let dr = self.d_r(r);
        let rhs = &(&(&dr * &dr) + &self.anticommutator.scale(s * (1.0 - 2.0 * r))) + &id.scale(s * s);
        let square = (&drs * &drs).distance(&rhs);
        FamilyChecks {
            qhat_square,
            qhat_hermitian,
            anticommutator,
            square,
        }
    }
}
