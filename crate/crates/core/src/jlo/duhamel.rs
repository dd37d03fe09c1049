use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::family::SuperconnectionFamily;
use crate::algebra::BlockOperator;
use crate::calculus::{simplex_exp_chain_led, EigenDecomposition, MAX_CHAIN};
use crate::error::{Error, Result};
use crate::Mat;

/// Largest order accepted by the Taylor-circle extraction.
pub const MAX_CIRCLE_ORDER: usize = 12;

/// How the Taylor coefficients of `G(ζ) = τ(Γq̂ e^{-(D₀² + ζK)})` are obtained,
/// with `K = [D₀, q̂]₊`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DuhamelMethod {
    /// Trapezoid rule on `|ζ| = radius`. `None` selects `1 / (1 + ‖K‖)`.
    TaylorCircle { radius: Option<f64>, points: usize },
    /// Simplex chains evaluated by divided differences.
    DividedDifference,
    /// Uniform sampling of the simplex.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for DuhamelMethod {
    fn default() -> Self {
        DuhamelMethod::TaylorCircle {
            radius: None,
            points: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DuhamelResult {
    /// `c_0, …, c_{n_max}`.
    pub coefficients: Vec<Complex64>,
    /// Per-coefficient standard errors (Monte Carlo only).
    pub standard_errors: Option<Vec<f64>>,
    pub method: DuhamelMethod,
}

impl DuhamelResult {
    /// `max |c_{2j}| / max |c_n|`, or 0 if all coefficients vanish.
    pub fn even_ratio(&self) -> f64 {
        let max = self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let even = self.coefficients.iter().step_by(2).map(|c| c.norm()).fold(0.0, f64::max);
        even / max
    }
}

fn lead(fam: &SuperconnectionFamily) -> BlockOperator {
    fam.graded().gamma() * fam.qhat()
}

/// `G(ζ) = τ(Γq̂ e^{-(D₀² + ζ[D₀, q̂]₊)})` for complex `ζ`.
pub fn generating_function(fam: &SuperconnectionFamily, zeta: Complex64) -> Complex64 {
    let model = fam.graded().doubled();
    let d0 = fam.d0();
    let sq = d0 * d0;
    let k = fam.anticommutator();
    let l = lead(fam);
    let mut total = Complex64::new(0.0, 0.0);
    for (i, block) in model.blocks().iter().enumerate() {
        let m: Mat = -(sq.block(i) + k.block(i) * zeta);
        let e = m.exp();
        total += (l.block(i) * e).trace() * block.weight;
    }
    total
}

fn taylor_circle(fam: &SuperconnectionFamily, n_max: usize, radius: Option<f64>, points: usize) -> Result<Vec<Complex64>> {
    if n_max > MAX_CIRCLE_ORDER {
        return Err(Error::ChainTooLong {
            len: n_max,
            max: MAX_CIRCLE_ORDER,
        });
    }
    if points <= n_max {
        return Err(Error::InvalidParameter(format!(
            "{points} circle points cannot resolve order {n_max}"
        )));
    }
    let rho = radius.unwrap_or_else(|| 1.0 / (1.0 + fam.anticommutator().norm()));
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("circle radius {rho}")));
    }
    let samples: Vec<(Complex64, Complex64)> = (0..points)
        .map(|j| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64);
            (w, generating_function(fam, w * rho))
        })
        .collect();
    Ok((0..=n_max)
        .map(|n| {
            let s: Complex64 = samples.iter().map(|(w, g)| g * w.powu(n as u32).conj()).sum();
            s / (points as f64 * rho.powi(n as i32))
        })
        .collect())
}

fn divided_difference(fam: &SuperconnectionFamily, n_max: usize) -> Result<Vec<Complex64>> {
    if n_max > MAX_CHAIN {
        return Err(Error::ChainTooLong {
            len: n_max,
            max: MAX_CHAIN,
        });
    }
    let model = fam.graded().doubled();
    let d0 = fam.d0();
    let sq = (d0 * d0).assume_hermitian();
    let k = fam.anticommutator();
    let l = lead(fam);
    (0..=n_max)
        .map(|n| {
            let bs = vec![k.clone(); n];
            let v = simplex_exp_chain_led(model, &l, &sq, &bs)?;
            Ok(if n % 2 == 0 { v } else { -v })
        })
        .collect()
}

fn monte_carlo(
    fam: &SuperconnectionFamily,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("at least two samples required".into()));
    }
    let model = fam.graded().doubled();
    let d0 = fam.d0();
    let eig = EigenDecomposition::new(&(d0 * d0).assume_hermitian())?;
    let k = eig.to_eigenbasis(fam.anticommutator());
    let l = eig.to_eigenbasis(&lead(fam));
    let weights = model.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0)];
    let mut errors = vec![0.0];
    coeffs[0] = eig
        .values()
        .iter()
        .enumerate()
        .map(|(b, vals)| {
            let s: Complex64 = vals.iter().enumerate().map(|(i, v)| l.block(b)[(i, i)] * (-v).exp()).sum();
            s * weights[b]
        })
        .sum();
    let mut fact = 1.0;
    for n in 1..=n_max {
        fact *= n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        let mut t = vec![0.0; n + 1];
        for _ in 0..samples {
            let mut total = 0.0;
            for x in t.iter_mut() {
                *x = Exp1.sample(&mut rng);
                total += *x;
            }
            let mut value = Complex64::new(0.0, 0.0);
            for (b, vals) in eig.values().iter().enumerate() {
                let decay = |tj: f64| {
                    Mat::from_diagonal(&DVector::from_iterator(
                        vals.len(),
                        vals.iter().map(|v| Complex64::new((-tj / total * v).exp(), 0.0)),
                    ))
                };
                let mut prod = l.block(b) * decay(t[0]);
                for &tj in &t[1..] {
                    prod = prod * k.block(b) * decay(tj);
                }
                value += prod.trace() * weights[b];
            }
            sum += value;
            sum_sq += value.norm_sqr();
        }
        let m = samples as f64;
        let mean = sum / m;
        let var = ((sum_sq / m - mean.norm_sqr()) * m / (m - 1.0)).max(0.0);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(mean * (sign / fact));
        errors.push((var / m).sqrt() / fact);
    }
    Ok((coeffs, errors))
}

/// The Taylor coefficients `c_0, …, c_{n_max}` of `G(ζ)`, so that
/// `c_n = (-1)^n τ(Γq̂ ∫_{Δ_n} e^{-t_0 D₀²} K ⋯ K e^{-t_n D₀²} dt)`.
pub fn duhamel_coefficients(fam: &SuperconnectionFamily, n_max: usize, method: DuhamelMethod) -> Result<DuhamelResult> {
    let (coefficients, standard_errors) = match method {
        DuhamelMethod::TaylorCircle { radius, points } => (taylor_circle(fam, n_max, radius, points)?, None),
        DuhamelMethod::DividedDifference => (divided_difference(fam, n_max)?, None),
        DuhamelMethod::MonteCarlo { samples, seed } => {
            let (c, e) = monte_carlo(fam, n_max, samples, seed)?;
            (c, Some(e))
        }
    };
    Ok(DuhamelResult {
        coefficients,
        standard_errors,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SemifiniteModel;
    use crate::sample::Sampler;

    fn family(seed: u64) -> SuperconnectionFamily {
        let model = SemifiniteModel::new([(3, 1.0), (2, 0.7)]).unwrap();
        let mut s = Sampler::new(seed);
        let d = s.hermitian(&model, 1.5);
        let u = s.unitary(&model);
        SuperconnectionFamily::new(&model, &d, &u).unwrap()
    }

    #[test]
    fn circle_and_divided_differences_agree() {
        let fam = family(3);
        let tc = duhamel_coefficients(&fam, 5, DuhamelMethod::default()).unwrap();
        let dd = duhamel_coefficients(&fam, 5, DuhamelMethod::DividedDifference).unwrap();
        for (a, b) in tc.coefficients.iter().zip(&dd.coefficients) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
        assert!(dd.coefficients[1].norm() > 1e-2);
        assert!(tc.even_ratio() < 1e-10);
    }

    #[test]
    fn monte_carlo_within_three_sigma() {
        let fam = family(5);
        let dd = duhamel_coefficients(&fam, 1, DuhamelMethod::DividedDifference).unwrap();
        let mc = duhamel_coefficients(&fam, 1, DuhamelMethod::MonteCarlo { samples: 4000, seed: 9 }).unwrap();
        let se = mc.standard_errors.unwrap()[1];
        assert!((mc.coefficients[1] - dd.coefficients[1]).norm() < 3.0 * se);
    }

    #[test]
    fn order_guards() {
        let fam = family(1);
        assert!(matches!(
            duhamel_coefficients(&fam, 6, DuhamelMethod::DividedDifference),
            Err(Error::ChainTooLong { .. })
        ));
        assert!(duhamel_coefficients(&fam, 13, DuhamelMethod::default()).is_err());
    }
}
