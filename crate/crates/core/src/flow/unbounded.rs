use super::bounded::gamma_correction;
use super::report::EstimatorRecord;
use super::{Estimate, FlowConfig, OneForm};
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::error::{Error, Result};
use crate::paths::{bounded_transform, Path};

/// Which unbounded one-form to integrate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnboundedVariant {
    /// `π^{-1/2} τ(D' e^{-D²})` with `γ₀` corrections.
    Theta,
    /// `C_q^{-1} τ(D' e^{-(1+D²)^{1/q}})`, `0 < q < 1`, with `γ_{3/2,q}` corrections.
    Weak { q: f64 },
    /// `(ε/π)^{1/2} τ(D' e^{-εD²})` with corrections `γ₀(√ε D)`.
    Eps { eps: f64 },
}

impl UnboundedVariant {
    pub fn label(&self) -> String {
        match self {
            Self::Theta => "unbounded_theta".into(),
            Self::Weak { q } => format!("unbounded_q(q={q})"),
            Self::Eps { eps } => format!("unbounded_eps(eps={eps})"),
        }
    }
}

/// `γ₀(D) = γ_{3/2,1}(D(1+D²)^{-1/2})`.
pub fn gamma0(model: &SemifiniteModel, d: &BlockOperator, cfg: &FlowConfig) -> Result<Estimate> {
    gamma_correction(model, &bounded_transform(d)?, 1.5, 1.0, cfg)
}

/// Spectral flow of an unbounded path from its one-form integral and endpoint corrections.
pub fn sf_unbounded<P: Path + ?Sized>(
    model: &SemifiniteModel,
    path: &P,
    variant: UnboundedVariant,
    cfg: &FlowConfig,
) -> Result<EstimatorRecord> {
    let (da, db) = (path.start()?, path.end()?);
    let (form, ga, gb) = match variant {
        UnboundedVariant::Theta => (OneForm::Theta, gamma0(model, &da, cfg)?, gamma0(model, &db, cfg)?),
        UnboundedVariant::Weak { q } => {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidParameter(format!("q = {q} must lie in (0, 1)")));
            }
            (
                OneForm::Weak { q },
                gamma_correction(model, &bounded_transform(&da)?, 1.5, q, cfg)?,
                gamma_correction(model, &bounded_transform(&db)?, 1.5, q, cfg)?,
            )
        }
        UnboundedVariant::Eps { eps } => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
            }
            let s = eps.sqrt();
            (
                OneForm::Scaled { eps },
                gamma0(model, &da.scale(s), cfg)?,
                gamma0(model, &db.scale(s), cfg)?,
            )
        }
    };
    let est = form.integrate(model, path, cfg)?;
    Ok(EstimatorRecord::new(variant.label(), est.value, est.error)
        .with_correction("gamma_end", gb.value, gb.error)
        .with_correction("gamma_start", -ga.value, ga.error))
}
