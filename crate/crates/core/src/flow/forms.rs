use std::f64::consts::PI;

use super::constants::{c_q, c_rq, c_tilde};
use super::{path_integral, Estimate, FlowConfig};
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::calculus::quadrature::QuadratureSpec;
use crate::calculus::eigen::EigenDecomposition;
use crate::calculus::scalar::f_r;
use crate::error::{Error, Result};
use crate::paths::{OperatorPath, Path};

/// The one-forms `X ↦ τ(X g(D))` whose integrals give spectral flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OneForm {
    /// `α_r(X) = C_{r,q}^{-1} τ(X f_r(|1-F²|))` on bounded operators.
    Bounded { r: f64, q: f64 },
    /// `α(X) = π^{-1/2} τ(X e^{-D²})`.
    Theta,
    /// `α_q(X) = C_q^{-1} τ(X e^{-(1+D²)^{1/q}})`.
    Weak { q: f64 },
    /// `α^ε(X) = (ε/π)^{1/2} τ(X e^{-εD²})`.
    Scaled { eps: f64 },
    /// `C̃_{p/2}^{-1} τ(X (1+D²)^{-p/2})`.
    Summable { p: f64 },
}

impl OneForm {
    /// The scalar density `g` with `α(X) = τ(X g(D))`.
    pub fn density(&self) -> Result<Box<dyn Fn(f64) -> f64>> {
        Ok(match *self {
            Self::Bounded { r, q } => {
                let c = c_rq(r, q)?;
                Box::new(move |x| f_r((1.0 - x * x).abs(), r, q) / c)
            }
            Self::Theta => Box::new(|x| (-x * x).exp() / PI.sqrt()),
            Self::Weak { q } => {
                let c = c_q(q)?;
                Box::new(move |x| (-(1.0 + x * x).powf(1.0 / q)).exp() / c)
            }
            Self::Scaled { eps } => {
                if !(eps > 0.0) {
                    return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
                }
                let k = (eps / PI).sqrt();
                Box::new(move |x| k * (-eps * x * x).exp())
            }
            Self::Summable { p } => {
                let c = c_tilde(p)?;
                Box::new(move |x| (1.0 + x * x).powf(-0.5 * p) / c)
            }
        })
    }

    /// `α_D(X)`.
    pub fn apply(&self, model: &SemifiniteModel, point: &BlockOperator, tangent: &BlockOperator) -> Result<f64> {
        model.check(point)?;
        model.check(tangent)?;
        let g = self.density()?;
        let eig = EigenDecomposition::new(point)?;
        Ok(eig.trace_with(&model.weights(), tangent, g))
    }

    /// `∫_γ α` along any path.
    pub fn integrate<P: Path + ?Sized>(&self, model: &SemifiniteModel, path: &P, cfg: &FlowConfig) -> Result<Estimate> {
        path_integral(model, self, path, &cfg.quad)
    }

    /// `θ(X) = ∫ α` along the straight line from `base` to `X`.
    pub fn potential(&self, model: &SemifiniteModel, base: &BlockOperator, x: &BlockOperator, cfg: &FlowConfig) -> Result<Estimate> {
        let line = OperatorPath::between(base, x)?;
        self.integrate(model, &line, cfg)
    }
}

/// Outcome of a closed-loop test of a one-form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopResidual {
    /// `|∮ α|`.
    pub residual: f64,
    pub quadrature_error: f64,
    /// Largest `|∫_edge α − (θ(end) − θ(start))|` over the loop's segments.
    pub edge_residual: f64,
    /// Largest `|dθ(X) − α(X)|` at segment starts, by a Richardson-extrapolated
    /// five-point stencil.
    pub derivative_residual: f64,
}

/// Integrates `form` around a closed path and checks it against its potential
/// (based at `base`) edge by edge and through finite differences.
pub fn one_form_loop_test(
    model: &SemifiniteModel,
    base: &BlockOperator,
    loop_path: &OperatorPath,
    form: &OneForm,
    cfg: &FlowConfig,
) -> Result<LoopResidual> {
    let start = loop_path.start()?;
    let end = loop_path.end()?;
    let gap = start.distance(&end);
    if gap > 1e-12 * (1.0 + start.norm()) {
        return Err(Error::InvalidParameter(format!("path is not closed (gap {gap:.3e})")));
    }
    let total = form.integrate(model, loop_path, cfg)?;
    let knots = loop_path.breakpoints();
    let mut edge_residual: f64 = 0.0;
    let mut derivative_residual: f64 = 0.0;
    let fine = FlowConfig {
        quad: QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_subdivisions: 8000,
            ..cfg.quad
        },
        ..*cfg
    };
    for w in knots.windows(2) {
        let a = loop_path.evaluate(w[0])?;
        let b = loop_path.evaluate(w[1])?;
        let edge = OperatorPath::between(&a, &b)?;
        let along = form.integrate(model, &edge, cfg)?.value;
        let pa = form.potential(model, base, &a, cfg)?.value;
        let pb = form.potential(model, base, &b, cfg)?.value;
        edge_residual = edge_residual.max((along - (pb - pa)).abs());

        let x = loop_path.derivative(w[0])?;
        let theta = |s: f64| -> Result<f64> { Ok(form.potential(model, base, &(&a + &x.scale(s)), &fine)?.value) };
        let stencil = |h: f64| -> Result<f64> {
            Ok((theta(-2.0 * h)? - 8.0 * theta(-h)? + 8.0 * theta(h)? - theta(2.0 * h)?) / (12.0 * h))
        };
        let h = 2e-3 / x.norm().max(1.0);
        let d = (16.0 * stencil(0.5 * h)? - stencil(h)?) / 15.0;
        derivative_residual = derivative_residual.max((d - form.apply(model, &a, &x)?).abs());
    }
    Ok(LoopResidual {
        residual: total.value.abs(),
        quadrature_error: total.error,
        edge_residual,
        derivative_residual,
    })
}
