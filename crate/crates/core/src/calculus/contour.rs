//! Resolvent contour integrals for `|T|^{-2c} e^{-b|T|^{-2k}}` and the
//! derivative of `|1-F²|^{-r} e^{-|1-F²|^{-1/q}}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{integrate_1d, QuadratureSpec};
use crate::algebra::BlockOperator;
use crate::error::{Error, Result};
use crate::Mat;

/// The contour made of `σ₁ = {x + i : x ≥ a}` (traversed leftwards),
/// `σ₂ = {a + iy : |y| ≤ 1}` (downwards) and `σ₃ = {x - i : x ≥ a}`
/// (rightwards), with the horizontal pieces truncated at `Re λ = radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub a: f64,
    pub radius: f64,
}

impl Contour {
    /// Corner `a = ½‖T‖^{-2}` and truncation radius from the tail bound
    /// `scale·(1+x²)^{power/2} e^{-b(1+x²)^{k/2}/2}`.
    fn build(t_norm: f64, power: f64, scale: f64, k: f64, b: f64, spec: &QuadratureSpec) -> Result<Self> {
        let a = 0.5 / (t_norm * t_norm);
        let bound = |x: f64| {
            let s = 1.0 + x * x;
            scale * s.powf(0.5 * power) * (-0.5 * b * s.powf(0.5 * k)).exp()
        };
        let tail = |r: f64| integrate_1d(bound, r, f64::INFINITY, &QuadratureSpec::with_tol(1e-3 * spec.abs_tol)).value;
        let mut radius = (2.0 * a).max(1.0);
        while tail(radius) > 0.1 * spec.abs_tol {
            radius *= 1.5;
            if radius > 1e12 {
                return Err(Error::InvalidParameter("contour tail does not decay".into()));
            }
        }
        if k * (1.0 / radius).atan() > PI / 3.0 {
            return Err(Error::InvalidParameter(format!(
                "k·arg λ exceeds π/3 on the contour tails (k = {k})"
            )));
        }
        Ok(Self { a, radius })
    }

    /// `(1/2πi)∮ h(λ) dλ` for a matrix-valued `h`.
    pub fn integrate<H>(&self, h: H, spec: &QuadratureSpec) -> Result<Mat>
    where
        H: Fn(Complex64) -> Mat,
    {
        let i = Complex64::new(0.0, 1.0);
        let top = integrate_1d(|x| h(Complex64::new(x, 1.0)), self.a, self.radius, spec).require()?;
        let side = integrate_1d(|y| h(Complex64::new(self.a, y)), -1.0, 1.0, spec).require()?;
        let bottom = integrate_1d(|x| h(Complex64::new(x, -1.0)), self.a, self.radius, spec).require()?;
        let sum = bottom.value - top.value - side.value * i;
        Ok(sum / (2.0 * PI * i))
    }
}

/// `λ^c e^{-bλ^k}` on the principal branch.
fn weight(lambda: Complex64, c: f64, k: f64, b: f64) -> Complex64 {
    let ln = lambda.ln();
    (ln * c - (ln * k).exp() * b).exp()
}

fn check_params(c: f64, k: f64, b: f64) -> Result<()> {
    if !(c >= 0.0 && k > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "contour parameters need c ≥ 0, k > 0, b > 0 (got {c}, {k}, {b})"
        )));
    }
    Ok(())
}

/// `|T|^{-2c} e^{-b|T|^{-2k}}` (zero on `ker T`) as the contour integral
/// `(1/2πi)∫ T²(λT²-1)^{-1} λ^c e^{-bλ^k} dλ`.
///
/// The result is returned as a general operator; it is Hermitian up to
/// quadrature error.
pub fn contour_func_calc(t: &BlockOperator, c: f64, k: f64, b: f64, spec: &QuadratureSpec) -> Result<BlockOperator> {
    check_params(c, k, b)?;
    let norm = t.norm();
    if norm == 0.0 {
        return Ok(BlockOperator::zeros(&t.dims()));
    }
    let contour = Contour::build(norm, c + 1.0, norm * norm, k, b, spec)?;
    let blocks = t
        .blocks()
        .iter()
        .map(|tb| {
            let t2 = tb * tb;
            let n = t2.nrows();
            contour.integrate(
                |lambda| {
                    let m = &t2 * lambda - Mat::identity(n, n);
                    let x = m.lu().solve(&t2).expect("λT²-1 is invertible off the spectrum");
                    x * weight(lambda, c, k, b)
                },
                spec,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockOperator::new(blocks))
}

/// `d/ds f_r(|1-(F+sX)²|)` at `s = 0`, with `f_r(y) = y^{-r} e^{-y^{-1/q}}`.
///
/// Writing `T = 1-F²` and `g(T) = |T|^{-r/2} e^{-|T|^{-1/q}/2}`, the
/// derivative is `g·dg + dg·g` where
/// `dg = (1/2πi)∫ R [T, [F,X]₊]₊ R λ^{r/4} e^{-λ^{1/(2q)}/2} dλ`, `R = (λT²-1)^{-1}`.
pub fn contour_g_squared_derivative(
    f: &BlockOperator,
    x: &BlockOperator,
    r: f64,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<BlockOperator> {
    if !(q > 0.0 && q <= 1.0 && r >= 0.0) {
        return Err(Error::InvalidParameter(format!("need r ≥ 0 and q ∈ (0,1], got {r}, {q}")));
    }
    let (c, k, b) = (0.25 * r, 0.5 / q, 0.5);
    let t = (&BlockOperator::identity(&f.dims()) - &(f * f)).assume_hermitian();
    let s = t.anticommutator(&f.anticommutator(x));
    let g = contour_func_calc(&t, c, k, b, spec)?;
    let norm = t.norm();
    if norm == 0.0 {
        return Ok(BlockOperator::zeros(&f.dims()));
    }
    let contour = Contour::build(norm, c + 2.0, s.norm().max(1e-300), k, b, spec)?;
    let blocks = t
        .blocks()
        .iter()
        .zip(s.blocks())
        .map(|(tb, sb)| {
            let t2 = tb * tb;
            let n = t2.nrows();
            contour.integrate(
                |lambda| {
                    let m = &t2 * lambda - Mat::identity(n, n);
                    let res = m.try_inverse().expect("λT²-1 is invertible off the spectrum");
                    &res * sb * &res * weight(lambda, c, k, b)
                },
                spec,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let dg = BlockOperator::new(blocks);
    Ok(&(&g * &dg) + &(&dg * &g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_one() {
        let t = BlockOperator::from_real_diagonal(&[vec![1.0]]);
        let v = contour_func_calc(&t, 0.0, 1.0, 1.0, &QuadratureSpec::with_tol(1e-12)).unwrap();
        assert!((v.block(0)[(0, 0)] - Complex64::new((-1f64).exp(), 0.0)).norm() < 1e-11);
    }

    #[test]
    fn zero_eigenvalue_contributes_nothing() {
        let t = BlockOperator::from_real_diagonal(&[vec![0.0, 1.3]]);
        let v = contour_func_calc(&t, 0.75, 1.0, 0.5, &QuadratureSpec::with_tol(1e-12)).unwrap();
        assert!(v.block(0)[(0, 0)].norm() < 1e-12);
        let expected = 1.3f64.powf(-1.5) * (-0.5 / (1.3f64 * 1.3)).exp();
        assert!((v.block(0)[(1, 1)].re - expected).abs() < 1e-11);
    }
}
