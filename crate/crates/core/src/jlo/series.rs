use std::f64::consts::PI;

use num_complex::Complex64;

use super::duhamel::{duhamel_coefficients, DuhamelMethod};
use super::family::SuperconnectionFamily;
use crate::algebra::BlockOperator;
use crate::calculus::{alternating_chain_integrals, simplex_exp_chain_led, MAX_CHAIN};
use crate::error::{Error, Result};

/// How a JLO term is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum TermMethod {
    /// Index contraction on the base space; `2k + 1 ≤ 5`.
    Simplex,
    /// First block row of one dense exponential on the base space.
    #[default]
    BlockExponential,
    /// From the Duhamel coefficient `c_{2k+1}` on the doubled space.
    Duhamel(DuhamelMethod),
}

/// `T_k(u) = ∫_{Δ_{2k+1}} τ(u⁻¹ e^{-t₀D²} [D,u] e^{-t₁D²} [D,u⁻¹] ⋯ [D,u] e^{-t_{2k+1}D²}) dt`.
pub fn jlo_term(fam: &SuperconnectionFamily, k: usize, method: TermMethod) -> Result<f64> {
    let n = 2 * k + 1;
    let model = fam.base_model();
    let d = fam.d();
    let d2 = (d * d).assume_hermitian();
    let pattern = [fam.commutator_u(), fam.commutator_u_inv()];
    let lead = fam.u().adjoint();
    let value: Complex64 = match method {
        TermMethod::Simplex => {
            if n > MAX_CHAIN {
                return Err(Error::ChainTooLong { len: n, max: MAX_CHAIN });
            }
            let bs: Vec<BlockOperator> = (0..n).map(|j| pattern[j % 2].clone()).collect();
            simplex_exp_chain_led(model, &lead, &d2, &bs)?
        }
        TermMethod::BlockExponential => {
            let y = alternating_chain_integrals(&d2, &pattern, n);
            model.trace_product(&lead, &y[n])?
        }
        TermMethod::Duhamel(m) => {
            let c = duhamel_coefficients(fam, n, m)?.coefficients[n];
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            c * (sign * DUHAMEL_FACTOR)
        }
    };
    Ok(value.re)
}

/// `T_k = (-1)^k c_{2k+1} · DUHAMEL_FACTOR`.
const DUHAMEL_FACTOR: f64 = 0.25;

/// Partial sums of `(1/√π) Σ_k (-1)^k k! T_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct JloSeries {
    pub value: f64,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `π^{-1/2} ‖[D,u]‖^{2k+1} τ(1) k! / (2k+1)!`, which bounds the k-th scaled term.
    pub envelope: Vec<f64>,
    pub converged: bool,
}

/// `π^{-1/2} c^{2k+1} τ(1) k! / (2k+1)!` for `k = 0, 1, …` until it falls below
/// `tol` while decreasing, or `k_max` is reached.
fn envelope(comm: f64, mass: f64, tol: f64, k_max: usize) -> (Vec<f64>, bool) {
    let mut out = Vec::new();
    let mut log = comm.ln() + mass.ln() - 0.5 * std::f64::consts::PI.ln();
    for k in 0..=k_max {
        if k > 0 {
            let kf = k as f64;
            log += 2.0 * comm.ln() + kf.ln() - (2.0 * kf).ln() - (2.0 * kf + 1.0).ln();
        }
        let v = log.exp();
        let decreasing = k == 0 || v < *out.last().unwrap_or(&f64::INFINITY);
        out.push(v);
        if v < tol && decreasing {
            return (out, true);
        }
    }
    (out, false)
}

/// Sums the JLO series up to the first `k` at which the a-priori term bound
/// is below `tol` and decreasing; the last two partial sums must then also
/// differ by less than `tol`.
pub fn jlo_series_sf(fam: &SuperconnectionFamily, tol: f64, k_max: usize) -> Result<JloSeries> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let model = fam.base_model();
    let d = fam.d();
    let d2 = (d * d).assume_hermitian();
    let pattern = [fam.commutator_u(), fam.commutator_u_inv()];
    let lead = fam.u().adjoint();
    let comm = pattern[0].norm();
    if comm == 0.0 {
        return Ok(JloSeries {
            value: 0.0,
            terms: vec![0.0],
            partial_sums: vec![0.0],
            envelope: vec![0.0],
            converged: true,
        });
    }
    let (envelope, bounded) = envelope(comm, model.total_weight(), tol, k_max);
    let k_end = envelope.len() - 1;
    // Y_n(λB) = λ^n Y_n(B); the rescaling keeps every order inside the
    // floating-point range, and each term is reassembled in logarithms.
    let lambda = (k_end.max(1) as f64) / comm;
    let scaled_pattern = [pattern[0].scale(lambda), pattern[1].scale(lambda)];
    let y = alternating_chain_integrals(&d2, &scaled_pattern, 2 * k_end + 1);
    let mut terms = Vec::with_capacity(k_end + 1);
    let mut partial_sums = Vec::with_capacity(k_end + 1);
    let mut sum = 0.0;
    let mut ln_fact = 0.0;
    for k in 0..=k_end {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let n = (2 * k + 1) as f64;
        let raw = model.trace_product(&lead, &y[2 * k + 1])?.re;
        let (t, scaled) = if raw == 0.0 {
            (0.0, 0.0)
        } else {
            let ln_t = raw.abs().ln() - n * lambda.ln();
            let sign = raw.signum() * if k % 2 == 0 { 1.0 } else { -1.0 };
            (raw.signum() * ln_t.exp(), sign * (ln_t + ln_fact - 0.5 * PI.ln()).exp())
        };
        sum += scaled;
        terms.push(t);
        partial_sums.push(sum);
    }
    let settled = match partial_sums.as_slice() {
        [.., a, b] => (b - a).abs() < tol,
        _ => true,
    };
    Ok(JloSeries {
        value: sum,
        terms,
        partial_sums,
        envelope,
        converged: bounded && settled,
    })
}

/// `T_k(u) + T_k(u⁻¹)`.
pub fn cocycle_antisymmetry_check(fam: &SuperconnectionFamily, k: usize) -> Result<f64> {
    let a = jlo_term(fam, k, TermMethod::BlockExponential)?;
    let b = jlo_term(&fam.inverted()?, k, TermMethod::BlockExponential)?;
    Ok(a + b)
}
