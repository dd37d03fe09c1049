//! Adaptive Gauss–Kronrod quadrature for scalar, complex and matrix values.

use num_complex::Complex64;

use crate::algebra::BlockOperator;
use crate::error::{Error, Result};
use crate::Mat;

/// Substitution used to map a half-line onto `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SemiInfinite {
    /// `t = a + u/(1-u)`; suited to exponentially decaying integrands.
    #[default]
    ExpDecay,
    /// `t = a + tan(πu/2)`; suited to algebraic tails.
    Algebraic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub semi_infinite: SemiInfinite,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
            semi_infinite: SemiInfinite::ExpDecay,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::InvalidParameter("max_subdivisions must be at least 8".into()));
        }
        Ok(())
    }
}

/// Values that can be integrated: a vector space with a magnitude.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    fn axpy(&mut self, a: f64, x: &Self);
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for Mat {
    fn zero_like(&self) -> Self {
        Mat::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += v * a;
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl QuadValue for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl QuadValue for BlockOperator {
    fn zero_like(&self) -> Self {
        BlockOperator::zeros(&self.dims())
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self = &*self + &x.scale(a);
    }
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl<T: QuadValue> QuadResult<T> {
    /// Turns a non-converged result into an error.
    pub fn require(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature {
                value: self.value.magnitude(),
                error: self.error,
                subdivisions: self.evaluations / KRONROD_POINTS,
            })
        }
    }
}

impl<T: QuadValue> QuadResult<T> {
    /// Adds another result, combining error estimates.
    pub fn combine(mut self, other: QuadResult<T>) -> Self {
        self.value.axpy(1.0, &other.value);
        self.error += other.error;
        self.converged &= other.converged;
        self.evaluations += other.evaluations;
        self
    }
}

const KRONROD_POINTS: usize = 21;

// 21-point Kronrod abscissae (non-negative half) and weights; the odd-indexed
// abscissae are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_411_257_600,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gauss_kronrod<T, F>(f: &F, a: f64, b: f64) -> Panel<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc.zero_like();
    let mut gauss = fc.zero_like();
    kronrod.axpy(WGK[10], &fc);
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kronrod.axpy(WGK[j], &f1);
        kronrod.axpy(WGK[j], &f2);
        if j % 2 == 1 {
            gauss.axpy(WG[j / 2], &f1);
            gauss.axpy(WG[j / 2], &f2);
        }
    }
    let mut diff = kronrod.clone();
    diff.axpy(-1.0, &gauss);
    let mut value = kronrod.zero_like();
    value.axpy(h, &kronrod);
    let error = (h * diff.magnitude()).abs();
    Panel { a, b, value, error }
}

fn adaptive<T, F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut panels = vec![gauss_kronrod(f, a, b)];
    let mut evaluations = KRONROD_POINTS;
    loop {
        let mut total = panels[0].value.zero_like();
        let mut error = 0.0;
        for p in &panels {
            total.axpy(1.0, &p.value);
            error += p.error;
        }
        let tol = spec.abs_tol.max(spec.rel_tol * total.magnitude());
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = &panels[worst];
        let mid = 0.5 * (p.a + p.b);
        let exhausted = panels.len() >= spec.max_subdivisions || !(mid > p.a && mid < p.b);
        if error <= tol || exhausted || !error.is_finite() {
            return QuadResult {
                value: total,
                error,
                converged: error <= tol,
                evaluations,
            };
        }
        let (pa, pb) = (p.a, p.b);
        let left = gauss_kronrod(f, pa, mid);
        let right = gauss_kronrod(f, mid, pb);
        evaluations += 2 * KRONROD_POINTS;
        panels[worst] = left;
        panels.push(right);
    }
}

/// `∫_a^b f(t) dt`. Either endpoint may be infinite; half-lines are mapped to
/// `[0, 1)` according to `spec.semi_infinite` and the real line is split at 0.
pub fn integrate_1d<T, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    assert!(!a.is_nan() && !b.is_nan(), "NaN integration limit");
    if a == b {
        let v = f(if a.is_finite() { a } else { 0.0 }).zero_like();
        return QuadResult {
            value: v,
            error: 0.0,
            converged: true,
            evaluations: 1,
        };
    }
    if a > b {
        let mut r = integrate_1d(f, b, a, spec);
        let v = r.value.clone();
        r.value = v.zero_like();
        r.value.axpy(-1.0, &v);
        return r;
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&f, a, b, spec),
        (true, false) => half_line(&|t| f(a + t), spec),
        (false, true) => half_line(&|t| f(b - t), spec),
        (false, false) => {
            let left = half_line(&|t| f(-t), spec);
            let right = half_line(&f, spec);
            left.combine(right)
        }
    }
}

/// `∫_0^∞ g(t) dt`.
fn half_line<T, G>(g: &G, spec: &QuadratureSpec) -> QuadResult<T>
where
    T: QuadValue,
    G: Fn(f64) -> T,
{
    match spec.semi_infinite {
        SemiInfinite::ExpDecay => {
            let h = |u: f64| {
                let s = 1.0 - u;
                let t = u / s;
                let v = g(t);
                let mut out = v.zero_like();
                out.axpy(1.0 / (s * s), &v);
                out
            };
            adaptive(&h, 0.0, 1.0, spec)
        }
        SemiInfinite::Algebraic => {
            let h = |u: f64| {
                let x = 0.5 * std::f64::consts::PI * u;
                let t = x.tan();
                let c = x.cos();
                let v = g(t);
                let mut out = v.zero_like();
                out.axpy(0.5 * std::f64::consts::PI / (c * c), &v);
                out
            };
            adaptive(&h, 0.0, 1.0, spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomials_are_exact() {
        let spec = QuadratureSpec::default();
        let r = integrate_1d(|x: f64| x.powi(8) - 3.0 * x.powi(3), -1.0, 2.0, &spec);
        let exact = (2f64.powi(9) + 1.0) / 9.0 - 0.75 * (16.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn gaussian_over_the_line() {
        let spec = QuadratureSpec::with_tol(1e-14);
        let r = integrate_1d(|x: f64| (-(1.0 + x * x)).exp(), f64::NEG_INFINITY, f64::INFINITY, &spec);
        assert!(r.converged);
        assert!((r.value - PI.sqrt() / E).abs() < 1e-14);
    }

    #[test]
    fn lorentzian_both_substitutions() {
        for sub in [SemiInfinite::ExpDecay, SemiInfinite::Algebraic] {
            let spec = QuadratureSpec {
                semi_infinite: sub,
                ..QuadratureSpec::with_tol(1e-13)
            };
            let r = integrate_1d(|x: f64| 1.0 / (1.0 + x * x), f64::NEG_INFINITY, f64::INFINITY, &spec);
            assert!((r.value - PI).abs() < 1e-11, "{sub:?}: {}", r.value);
        }
    }

    #[test]
    fn gamma_two_and_a_half() {
        let spec = QuadratureSpec::with_tol(1e-13);
        let r = integrate_1d(|t: f64| t.powf(1.5) * (-t).exp(), 0.0, f64::INFINITY, &spec);
        assert!((r.value - 1.329_340_388_179_137).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_negate() {
        let spec = QuadratureSpec::default();
        let a = integrate_1d(f64::sin, 0.0, 1.0, &spec).value;
        let b = integrate_1d(f64::sin, 1.0, 0.0, &spec).value;
        assert_eq!(a, -b);
    }

    #[test]
    fn exhaustion_is_flagged() {
        let spec = QuadratureSpec {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_subdivisions: 8,
            ..QuadratureSpec::default()
        };
        let r = integrate_1d(|x: f64| x.sqrt().recip(), 0.0, 1.0, &spec);
        assert!(!r.converged);
        assert!(r.require().is_err());
    }

    #[test]
    fn matrix_valued() {
        let spec = QuadratureSpec::default();
        let r = integrate_1d(
            |t: f64| Mat::from_element(2, 2, Complex64::new(t, -t * t)),
            0.0,
            1.0,
            &spec,
        );
        assert!((r.value[(1, 0)] - Complex64::new(0.5, -1.0 / 3.0)).norm() < 1e-15);
    }
}
