//! Spectral flow: the crossing oracle and the integral estimators.

mod bounded;
pub mod constants;
mod eta;
mod forms;
mod oracle;
mod report;
mod summable;
mod unbounded;

use std::cell::RefCell;

pub use bounded::{gamma_correction, sf_bounded_line, sf_bounded_path, theta_potential};
pub use constants::NormalizationConstants;
pub use eta::{eta_gamma_reconcile, eta_invariant, EtaReconciliation};
pub use forms::{one_form_loop_test, LoopResidual, OneForm};
pub use oracle::{
    nonnegative_projection, relative_index_exact, relative_index_formula, sf_oracle, sf_partition_sum, OracleResult,
};
pub use report::{EstimatorRecord, FlowReport};
pub use summable::{laplace_identity_check, sf_finitely_summable};
pub use unbounded::{gamma0, sf_unbounded, UnboundedVariant};

use crate::algebra::SemifiniteModel;
use crate::calculus::quadrature::{integrate_1d, QuadResult, QuadratureSpec};
use crate::error::{Error, Result};
use crate::paths::{Path, DEFAULT_KERNEL_TOL};

/// Shared numerical settings for the estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub quad: QuadratureSpec,
    /// Relative threshold below which eigenvalues count as zero.
    pub kernel_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::with_tol(1e-10),
            kernel_tol: DEFAULT_KERNEL_TOL,
        }
    }
}

/// A scalar estimate with its quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integrates `f` over `[a, b]`, surfacing the first error raised by `f`
/// and refusing unconverged results.
pub(crate) fn integrate_fallible<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let r = integrate_1d(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r.require()
}

/// `∫ form(X_t; X_t') dt` over a path, split at its breakpoints.
pub(crate) fn path_integral<P: Path + ?Sized>(
    model: &SemifiniteModel,
    form: &OneForm,
    path: &P,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let knots = path.breakpoints();
    let mut value = 0.0;
    let mut error = 0.0;
    for w in knots.windows(2) {
        let r = integrate_fallible(
            |t| {
                let x = path.evaluate(t)?;
                let dx = path.derivative(t.min(w[1]).max(w[0]))?;
                form.apply(model, &x, &dx)
            },
            w[0],
            w[1],
            spec,
        )?;
        value += r.value;
        error += r.error;
    }
    Ok(Estimate { value, error })
}
