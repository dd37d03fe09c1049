use std::f64::consts::PI;

use super::unbounded::gamma0;
use super::{integrate_fallible, Estimate, FlowConfig};
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::calculus::eigen::EigenDecomposition;
use crate::error::{Error, Result};

/// `η_ε(D) = π^{-1/2} ∫_ε^∞ τ(D e^{-tD²}) t^{-1/2} dt`.
///
/// Eigenvalues within the kernel threshold are treated as exact zeros, which
/// `D` annihilates.
pub fn eta_invariant(model: &SemifiniteModel, d: &BlockOperator, eps: f64, cfg: &FlowConfig) -> Result<Estimate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
    }
    model.check(d)?;
    let eig = EigenDecomposition::new(d)?;
    let thr = cfg.kernel_tol * eig.max_abs_eigenvalue();
    let terms: Vec<(f64, f64)> = eig
        .values()
        .iter()
        .zip(model.blocks())
        .flat_map(|(vals, b)| vals.iter().filter(|v| v.abs() > thr).map(move |&v| (b.weight, v)))
        .collect();
    if terms.is_empty() {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let r = integrate_fallible(
        |t| {
            let s: f64 = terms.iter().map(|&(w, v)| w * v * (-t * v * v).exp()).sum();
            Ok(s / (PI * t).sqrt())
        },
        eps,
        f64::INFINITY,
        &cfg.quad,
    )?;
    Ok(Estimate {
        value: r.value,
        error: r.error,
    })
}

/// Both sides of `½η_ε(D) = γ₀(√ε D) − ½τ([ker D])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaReconciliation {
    pub half_eta: f64,
    pub gamma0: f64,
    pub kernel_term: f64,
    /// `½η_ε(D) − γ₀(√ε D) + ½τ([ker D])`.
    pub residual: f64,
    pub quadrature_error: f64,
}

pub fn eta_gamma_reconcile(model: &SemifiniteModel, d: &BlockOperator, eps: f64, cfg: &FlowConfig) -> Result<EtaReconciliation> {
    let eta = eta_invariant(model, d, eps, cfg)?;
    let g = gamma0(model, &d.scale(eps.sqrt()), cfg)?;
    let eig = EigenDecomposition::new(d)?;
    let thr = cfg.kernel_tol * eig.max_abs_eigenvalue();
    let kernel_term = 0.5 * eig.trace_of(&model.weights(), |v| if v.abs() <= thr { 1.0 } else { 0.0 });
    let half_eta = 0.5 * eta.value;
    Ok(EtaReconciliation {
        half_eta,
        gamma0: g.value,
        kernel_term,
        residual: half_eta - g.value + kernel_term,
        quadrature_error: 0.5 * eta.error + g.error,
    })
}
