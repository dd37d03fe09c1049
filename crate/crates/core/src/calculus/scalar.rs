//! Scalar functions shared by the estimators.

/// Values below this magnitude are flushed to zero.
pub const FLUSH: f64 = 1e-300;

fn flush(v: f64) -> f64 {
    if v.abs() < FLUSH {
        0.0
    } else {
        v
    }
}

/// `f_r(y) = y^{-r} e^{-y^{-1/q}}` for `y ≥ 0`, with `f_r(0) = 0`.
///
/// Evaluated as a single exponential so that the tiny factor `e^{-y^{-1/q}}`
/// is never multiplied against a huge power.
pub fn f_r(y: f64, r: f64, q: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let ln = y.ln();
    let expo = -r * ln - (-ln / q).exp();
    if expo < -745.0 {
        0.0
    } else {
        flush(expo.exp())
    }
}

/// `g_r(y) = y^{-r/2} e^{-y^{-1/q}/2}`, the square root of [`f_r`].
pub fn g_r(y: f64, r: f64, q: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let ln = y.ln();
    let expo = -0.5 * r * ln - 0.5 * (-ln / q).exp();
    if expo < -745.0 {
        0.0
    } else {
        flush(expo.exp())
    }
}

/// Sign with `sign(0) = +1`.
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `x (1+x²)^{-1/2}`.
pub fn bounded(x: f64) -> f64 {
    x / (1.0 + x * x).sqrt()
}

/// Derivative of [`bounded`]: `(1+x²)^{-3/2}`.
pub fn bounded_prime(x: f64) -> f64 {
    (1.0 + x * x).powf(-1.5)
}
