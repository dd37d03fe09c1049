use super::constants::c_rq;
use super::report::EstimatorRecord;
use super::{Estimate, FlowConfig, OneForm};
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::calculus::eigen::EigenDecomposition;
use crate::calculus::quadrature::integrate_1d;
use crate::calculus::scalar::f_r;
use crate::error::{Error, Result};
use crate::paths::{BoundedPath, OperatorPath, Path};

fn symmetry(p: &BlockOperator) -> Result<BlockOperator> {
    let defect = p.projection_defect();
    if defect > 1e-10 {
        return Err(Error::NotProjection(defect));
    }
    let id = BlockOperator::identity(&p.dims());
    (&p.scale(2.0) - &id).into_hermitian()
}

/// `γ_{r,q}(F) = C_{r,q}^{-1} ∫₀¹ τ[(F̃−F) f_r(1−F_t²)] dt` along
/// `F_t = F + t(F̃−F)`, `F̃ = sign(F)`.
///
/// Every `F_t` is a function of `F`, so the integrand is diagonal in the
/// eigenbasis of `F` and the integral splits into `Σ w ∫_λ^{sign λ} f_r(1−x²) dx`.
pub fn gamma_correction(model: &SemifiniteModel, f: &BlockOperator, r: f64, q: f64, cfg: &FlowConfig) -> Result<Estimate> {
    model.check(f)?;
    let c = c_rq(r, q)?;
    let eig = EigenDecomposition::new(f)?;
    let norm = eig.max_abs_eigenvalue();
    if norm > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!("‖F‖ = {norm} exceeds 1")));
    }
    let thr = cfg.kernel_tol * norm;
    let mut value = 0.0;
    let mut error = 0.0;
    for (vals, block) in eig.values().iter().zip(model.blocks()) {
        for &lambda in vals {
            let target = if lambda >= -thr { 1.0 } else { -1.0 };
            let piece = integrate_1d(|x: f64| f_r((1.0 - x * x).abs(), r, q), lambda, target, &cfg.quad).require()?;
            value += block.weight * piece.value / c;
            error += block.weight * piece.error / c;
        }
    }
    Ok(Estimate { value, error })
}

/// Integral of `α_r` along the straight line from `2P−1` to `2Q−1`.
pub fn sf_bounded_line(
    model: &SemifiniteModel,
    p: &BlockOperator,
    q_proj: &BlockOperator,
    r: f64,
    q: f64,
    cfg: &FlowConfig,
) -> Result<EstimatorRecord> {
    model.check(p)?;
    model.check(q_proj)?;
    let path = BoundedPath::Affine(OperatorPath::between(&symmetry(p)?, &symmetry(q_proj)?)?);
    let est = OneForm::Bounded { r, q }.integrate(model, &path, cfg)?;
    Ok(EstimatorRecord::new(format!("bounded_line(r={r},q={q})"), est.value, est.error))
}

/// `∫ α_r + γ_{r,q}(F_end) − γ_{r,q}(F_start)` along a bounded path.
pub fn sf_bounded_path(
    model: &SemifiniteModel,
    path: &BoundedPath,
    r: f64,
    q: f64,
    cfg: &FlowConfig,
) -> Result<EstimatorRecord> {
    let est = OneForm::Bounded { r, q }.integrate(model, path, cfg)?;
    let g_end = gamma_correction(model, &path.end()?, r, q, cfg)?;
    let g_start = gamma_correction(model, &path.start()?, r, q, cfg)?;
    Ok(EstimatorRecord::new(format!("bounded_path(r={r},q={q})"), est.value, est.error)
        .with_correction("gamma_end", g_end.value, g_end.error)
        .with_correction("gamma_start", -g_start.value, g_start.error))
}

/// `θ_r(F) = C_{r,q}^{-1} ∫₀¹ τ[(F−F₀) f_r(1−F_t²)] dt` with `F_t = F₀ + t(F−F₀)`.
pub fn theta_potential(
    model: &SemifiniteModel,
    f0: &BlockOperator,
    f: &BlockOperator,
    r: f64,
    q: f64,
    cfg: &FlowConfig,
) -> Result<Estimate> {
    OneForm::Bounded { r, q }.potential(model, f0, f, cfg)
}
