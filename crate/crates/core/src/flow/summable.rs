use statrs::function::gamma::gamma;

use super::report::EstimatorRecord;
use super::{FlowConfig, OneForm};
use crate::algebra::{trace_norm, BlockOperator, SemifiniteModel};
use crate::calculus::eigen::EigenDecomposition;
use crate::calculus::quadrature::integrate_1d;
use crate::error::{Error, Result};
use crate::paths::Path;

/// Largest gap between the sorted per-block spectra of `a` and `b`.
fn spectral_gap(a: &BlockOperator, b: &BlockOperator) -> Result<f64> {
    let ea = EigenDecomposition::new(a)?;
    let eb = EigenDecomposition::new(b)?;
    Ok(ea
        .values()
        .iter()
        .zip(eb.values())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max))
}

/// `C̃_{p/2}^{-1} ∫ τ(D'(1+D²)^{-p/2}) dt` for paths with unitarily equivalent endpoints.
pub fn sf_finitely_summable<P: Path + ?Sized>(
    model: &SemifiniteModel,
    path: &P,
    p: f64,
    cfg: &FlowConfig,
) -> Result<EstimatorRecord> {
    let (da, db) = (path.start()?, path.end()?);
    let gap = spectral_gap(&da, &db)?;
    if gap > 1e-8 * da.norm().max(1.0) {
        return Err(Error::SpectrumMismatch(gap));
    }
    let est = OneForm::Summable { p }.integrate(model, path, cfg)?;
    Ok(EstimatorRecord::new(format!("finitely_summable(p={p})"), est.value, est.error))
}

/// `‖∫₀^∞ e^{-t(1+D²)} t^{n-1} dt − Γ(n)(1+D²)^{-n}‖₁`, the integral taken
/// as a matrix-valued quadrature.
pub fn laplace_identity_check(model: &SemifiniteModel, d: &BlockOperator, n: f64, cfg: &FlowConfig) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("n = {n} must be positive")));
    }
    model.check(d)?;
    let eig = EigenDecomposition::new(d)?;
    let integral = integrate_1d(
        |t: f64| {
            let p = t.powf(n - 1.0);
            eig.apply(|x| (-t * (1.0 + x * x)).exp() * p)
        },
        0.0,
        f64::INFINITY,
        &cfg.quad,
    )
    .require()?;
    let closed = eig.apply(|x| gamma(n) * (1.0 + x * x).powf(-n));
    trace_norm(model, &(&integral.value - &closed))
}
