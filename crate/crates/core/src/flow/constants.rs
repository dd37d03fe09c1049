//! Normalization constants, memoized per parameter set.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::calculus::quadrature::{integrate_1d, QuadratureSpec, SemiInfinite};
use crate::calculus::scalar::f_r;
use crate::error::{Error, Result};

const CONSTANT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Rq,
    Q,
    Tilde,
}

fn cache() -> &'static Mutex<HashMap<(Kind, u64, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(Kind, u64, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memo<F: FnOnce() -> f64>(kind: Kind, a: f64, b: f64, compute: F) -> f64 {
    let key = (kind, a.to_bits(), b.to_bits());
    if let Some(v) = cache().lock().expect("constant cache poisoned").get(&key) {
        return *v;
    }
    let v = compute();
    cache().lock().expect("constant cache poisoned").insert(key, v);
    v
}

fn spec(semi_infinite: SemiInfinite) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: CONSTANT_TOL,
        rel_tol: CONSTANT_TOL,
        max_subdivisions: 4000,
        semi_infinite,
    }
}

fn check_rq(r: f64, q: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite() && q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("need r ≥ 0 and q ∈ (0, 1], got r = {r}, q = {q}")));
    }
    Ok(())
}

/// `C_{r,q} = ∫_{-1}^{1} (1-u²)^{-r} e^{-(1-u²)^{-1/q}} du`.
pub fn c_rq(r: f64, q: f64) -> Result<f64> {
    check_rq(r, q)?;
    Ok(memo(Kind::Rq, r, q, || {
        let half = integrate_1d(|u: f64| f_r((1.0 - u) * (1.0 + u), r, q), 0.0, 1.0, &spec(SemiInfinite::ExpDecay));
        2.0 * half.value
    }))
}

/// `C_q = ∫_ℝ e^{-(1+x²)^{1/q}} dx`, which equals `C_{3/2,q}`.
pub fn c_q(q: f64) -> Result<f64> {
    check_rq(0.0, q)?;
    Ok(memo(Kind::Q, q, 0.0, || {
        let half = integrate_1d(
            |x: f64| (-(1.0 + x * x).powf(1.0 / q)).exp(),
            0.0,
            f64::INFINITY,
            &spec(SemiInfinite::ExpDecay),
        );
        2.0 * half.value
    }))
}

/// `C^ε = ∫_{-1}^{1} e^{-(1-u²)^{-1-ε}} du = C_{0, 1/(1+ε)}`.
pub fn c_eps(eps: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be non-negative")));
    }
    c_rq(0.0, 1.0 / (1.0 + eps))
}

/// `C̃_{p/2} = ∫_ℝ (1+x²)^{-p/2} dx`.
pub fn c_tilde(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    Ok(memo(Kind::Tilde, p, 0.0, || {
        // On [1, ∞) substitute x = v^{-m} with m = 1/(p-1), which removes the
        // algebraic endpoint behaviour.
        let m = 1.0 / (p - 1.0);
        let s = spec(SemiInfinite::Algebraic);
        let head = integrate_1d(|x: f64| (1.0 + x * x).powf(-0.5 * p), 0.0, 1.0, &s);
        let tail = integrate_1d(|v: f64| m * (1.0 + v.powf(2.0 * m)).powf(-0.5 * p), 0.0, 1.0, &s);
        2.0 * (head.value + tail.value)
    }))
}

/// The constants attached to one parameter choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationConstants {
    pub r: f64,
    pub q: f64,
    pub p: f64,
    pub c_rq: f64,
    pub c_q: f64,
    pub c_eps: f64,
    pub c_tilde: f64,
}

impl NormalizationConstants {
    /// `C^ε` is evaluated at `ε = 1/q - 1`, the exponent for which `C^ε = C_{0,q}`.
    pub fn new(r: f64, q: f64, p: f64) -> Result<Self> {
        Ok(Self {
            r,
            q,
            p,
            c_rq: c_rq(r, q)?,
            c_q: c_q(q)?,
            c_eps: c_eps(1.0 / q - 1.0)?,
            c_tilde: c_tilde(p)?,
        })
    }
}

/// `√π / e`.
pub fn c_one_closed_form() -> f64 {
    PI.sqrt() / std::f64::consts::E
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn c_one() {
        assert!((c_q(1.0).unwrap() - c_one_closed_form()).abs() < 1e-14);
    }

    #[test]
    fn three_halves_matches_c_q() {
        for q in [0.6, 0.8, 1.0] {
            assert!((c_rq(1.5, q).unwrap() - c_q(q).unwrap()).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn c_tilde_closed_form() {
        for p in [2.0, 2.7, 4.0, 1.5] {
            let exact = PI.sqrt() * gamma(0.5 * (p - 1.0)) / gamma(0.5 * p);
            assert!((c_tilde(p).unwrap() - exact).abs() < 1e-12 * exact, "p = {p}");
        }
        assert!((c_tilde(2.0).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn c_eps_is_c_zero_q() {
        assert_eq!(c_eps(0.25).unwrap(), c_rq(0.0, 0.8).unwrap());
        assert!(c_eps(-1.0).is_err());
    }
}
