use std::f64::consts::E;

use super::{singular_values, BlockOperator, SemifiniteModel, SingularValueFunction};
use crate::calculus::quadrature::{integrate_1d, QuadratureSpec};
use crate::error::{Error, Result};

fn log_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-14,
        ..QuadratureSpec::default()
    }
}

fn log_weight(t: f64) -> f64 {
    1.0 / (t + E).ln()
}

/// `∫_a^b (log(t+e))^{-1} dt`.
fn log_integral_between(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    integrate_1d(log_weight, a, b, &log_spec()).value
}

/// `L(x) = ∫₀ˣ (log(t+e))^{-1} dt`.
pub fn log_integral(x: f64) -> f64 {
    log_integral_between(0.0, x)
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q = {q} must lie in (0, 1]")));
    }
    Ok(())
}

/// Candidate abscissae for the ratio search: breakpoints, step midpoints and
/// a logarithmic grid with 64 points per decade.
fn search_grid(mu: &SingularValueFunction, w_min: f64, total: f64) -> Vec<f64> {
    let mut xs = Vec::new();
    let mut left = 0.0;
    for c in mu.breakpoints() {
        xs.push(c);
        xs.push(0.5 * (left + c));
        left = c;
    }
    let lo = (1e-6 * w_min).log10();
    let hi = (10.0 * total).log10();
    let n = ((hi - lo) * 64.0).ceil() as usize;
    for k in 0..=n {
        xs.push(10f64.powf(lo + (hi - lo) * k as f64 / n as f64));
    }
    xs.retain(|x| *x > 0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `sup_x ∫₀ˣ μ / L(x)`, the `Li` norm of the operator whose singular value
/// function is `mu`.
fn li_norm_of(mu: &SingularValueFunction, w_min: f64, total: f64) -> f64 {
    if mu.sup() == 0.0 {
        return 0.0;
    }
    let xs = search_grid(mu, w_min, total);
    let mut ratios = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &x in &xs {
        acc += log_integral_between(prev, x);
        prev = x;
        ratios.push(mu.integral_to(x) / acc);
    }
    let (best, &best_ratio) = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    let lo = if best == 0 { 0.5 * xs[0] } else { xs[best - 1] };
    let hi = if best + 1 < xs.len() { xs[best + 1] } else { 2.0 * xs[best] };
    let ratio = |x: f64| mu.integral_to(x) / log_integral(x);
    best_ratio.max(golden_max(ratio, lo, hi, 1e-10))
}

/// Golden-section search for a maximum on `[a, b]`, to relative width `tol`.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f1.max(f2);
    while (b - a) > tol * b.abs().max(f64::MIN_POSITIVE) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
    }
    best
}

/// `‖T‖_{Li^q} = (‖|T|^{1/q}‖_{Li})^q`.
pub fn li_q_norm(model: &SemifiniteModel, t: &BlockOperator, q: f64) -> Result<f64> {
    check_q(q)?;
    let mu = singular_values(model, t)?.powf(1.0 / q);
    Ok(li_norm_of(&mu, model.min_weight(), model.total_weight()).powf(q))
}

/// `sup_t μ_t(S) (log(t+e))^q`, attained at the left limit of a step end.
pub fn f_q_sup(model: &SemifiniteModel, s: &BlockOperator, q: f64) -> Result<f64> {
    check_q(q)?;
    let mu = singular_values(model, s)?;
    Ok(mu
        .steps()
        .iter()
        .zip(mu.breakpoints())
        .map(|(step, end)| step.value * (end + E).ln().powf(q))
        .fold(0.0, f64::max))
}

/// `τ(|T|)`.
pub fn trace_norm(model: &SemifiniteModel, t: &BlockOperator) -> Result<f64> {
    Ok(singular_values(model, t)?.integrate(|v| v))
}

/// `max(‖T‖, τ(|T|^p)^{1/p})`.
pub fn lp_norm(model: &SemifiniteModel, t: &BlockOperator, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    let mu = singular_values(model, t)?;
    Ok(mu.sup().max(mu.integrate(|v| v.powf(p)).powf(1.0 / p)))
}

/// `|||X|||_{F₀} = ‖X‖_{Li^{q/2}} + ‖XF₀ + F₀X‖_{Li^q}`.
pub fn affine_norm(model: &SemifiniteModel, x: &BlockOperator, f0: &BlockOperator, q: f64) -> Result<f64> {
    check_q(q)?;
    if !x.is_selfadjoint() {
        return Err(Error::NotSelfAdjoint {
            defect: x.hermitian_defect(),
            norm: x.norm(),
        });
    }
    model.check(f0)?;
    Ok(li_q_norm(model, x, 0.5 * q)? + li_q_norm(model, &x.anticommutator(f0), q)?)
}
