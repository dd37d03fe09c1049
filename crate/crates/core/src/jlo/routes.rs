use num_complex::Complex64;

use super::family::SuperconnectionFamily;
use crate::algebra::BlockOperator;
use crate::calculus::EigenDecomposition;
use crate::error::Result;
use crate::flow::{integrate_fallible, Estimate, FlowConfig};

/// `Str(Y e^{-X²})`.
fn heat_supertrace(fam: &SuperconnectionFamily, x: &BlockOperator, y: &BlockOperator) -> Result<Complex64> {
    let e = EigenDecomposition::new(x)?.apply(|v| (-v * v).exp());
    let gy = fam.graded().gamma() * y;
    Ok(fam.graded().doubled().trace_product(&gy, &e)? / (2.0 * std::f64::consts::PI.sqrt()))
}

fn bottom_integrand(fam: &SuperconnectionFamily, dot: &BlockOperator, r: f64, s: f64) -> Result<f64> {
    Ok(heat_supertrace(fam, &fam.d_rs(r, s), dot)?.re)
}

fn edge_integrand(fam: &SuperconnectionFamily, r: f64, s: f64) -> Result<f64> {
    Ok(heat_supertrace(fam, &fam.d_rs(r, s), fam.qhat())?.re)
}

fn r_integral(fam: &SuperconnectionFamily, s: f64, cfg: &FlowConfig) -> Result<Estimate> {
    let dot = fam.d_r_dot();
    let q = integrate_fallible(|r| bottom_integrand(fam, &dot, r, s), 0.0, 1.0, &cfg.quad)?;
    Ok(Estimate {
        value: q.value,
        error: q.error,
    })
}

fn s_integral(fam: &SuperconnectionFamily, r: f64, s0: f64, cfg: &FlowConfig) -> Result<Estimate> {
    let q = integrate_fallible(|s| edge_integrand(fam, r, s), 0.0, s0, &cfg.quad)?;
    Ok(Estimate {
        value: q.value,
        error: q.error,
    })
}

/// `∫₀¹ Str(Ḋ_r e^{-D_r²}) dr`, which is twice the spectral flow from `D` to `u⁻¹Du`.
pub fn sf_doubled_r_integral(fam: &SuperconnectionFamily, cfg: &FlowConfig) -> Result<Estimate> {
    r_integral(fam, 0.0, cfg)
}

/// `∫₀^∞ Str(q̂ e^{-D_{0,s}²}) ds`, the spectral flow from `D` to `u⁻¹Du`.
pub fn sf_superconnection_integral(fam: &SuperconnectionFamily, cfg: &FlowConfig) -> Result<Estimate> {
    s_integral(fam, 0.0, f64::INFINITY, cfg)
}

/// Sup over an `r`-grid of `|Str(Ḋ_r e^{-D_{r,s₀}²})|` for each `s₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub s0: Vec<f64>,
    pub sup: Vec<f64>,
    /// Least-squares slope of `ln sup` against `s₀²`; `None` if any entry is zero
    /// or fewer than two points are given.
    pub slope: Option<f64>,
}

impl DecayTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.sup.windows(2).all(|w| w[1] < w[0])
    }
}

/// `(‖D‖ + √(‖D‖²+6))/2`, the maximizer of `s³e^{-(s−‖D‖)²}`.
///
/// The integrand of the bottom edge vanishes to third order in `s`, and
/// every singular value of `D_{r,s}` is at least `s − ‖D‖` because `q̂` is
/// unitary and `‖D_r‖ ≤ ‖D‖`. Decay tables starting here are past the hump.
pub fn decay_onset(fam: &SuperconnectionFamily) -> f64 {
    let d = fam.d().norm();
    0.5 * (d + (d * d + 6.0).sqrt())
}

pub fn boundary_decay_check(fam: &SuperconnectionFamily, s0_list: &[f64], r_points: usize) -> Result<DecayTable> {
    let dot = fam.d_r_dot();
    let r_points = r_points.max(2);
    let mut sup = Vec::with_capacity(s0_list.len());
    for &s0 in s0_list {
        let mut m: f64 = 0.0;
        for i in 0..r_points {
            let r = i as f64 / (r_points - 1) as f64;
            m = m.max(bottom_integrand(fam, &dot, r, s0)?.abs());
        }
        sup.push(m);
    }
    let slope = if s0_list.len() >= 2 && sup.iter().all(|&v| v > 0.0) {
        let xs: Vec<f64> = s0_list.iter().map(|s| s * s).collect();
        let ys: Vec<f64> = sup.iter().map(|v| v.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    Ok(DecayTable {
        s0: s0_list.to_vec(),
        sup,
        slope,
    })
}

/// The two vertical edge integrals `∫₀^∞ Str(q̂ e^{-D_{r,s}²}) ds` at `r = 0, 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerticalEdges {
    pub left: Estimate,
    pub right: Estimate,
    /// `left + right`, which vanishes.
    pub sum: f64,
}

pub fn vertical_edge_symmetry_check(fam: &SuperconnectionFamily, cfg: &FlowConfig) -> Result<VerticalEdges> {
    let left = s_integral(fam, 0.0, f64::INFINITY, cfg)?;
    let right = s_integral(fam, 1.0, f64::INFINITY, cfg)?;
    Ok(VerticalEdges {
        left,
        right,
        sum: left.value + right.value,
    })
}

/// Max over `s` of `|τ(ρΓq̂ρ e^{-(D₀+sq̂)²}) + τ(Γq̂ e^{-(D₀+sq̂)²})|`.
pub fn rho_conjugation_residual(fam: &SuperconnectionFamily, s_values: &[f64]) -> Result<f64> {
    let g = fam.graded();
    let rho = g.rho();
    let gq = g.gamma() * fam.qhat();
    let conj = &(&rho * &gq) * &rho;
    let model = g.doubled();
    let mut worst: f64 = 0.0;
    for &s in s_values {
        let e = EigenDecomposition::new(&fam.d_rs(0.0, s))?.apply(|v| (-v * v).exp());
        let a = model.trace_product(&conj, &e)?;
        let b = model.trace_product(&gq, &e)?;
        worst = worst.max((a + b).norm());
    }
    Ok(worst)
}

/// The four edges of `∂([0,1]×[0,s₀])` for the exact one-form
/// `X ↦ Str(X e^{-D_{r,s}²})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectangleLoop {
    pub s0: f64,
    /// `s = 0`, `r` from 0 to 1.
    pub bottom: Estimate,
    /// `r = 1`, `s` from 0 to `s₀`.
    pub right: Estimate,
    /// `s = s₀`, `r` from 0 to 1.
    pub top: Estimate,
    /// `r = 0`, `s` from 0 to `s₀`.
    pub left: Estimate,
    /// `bottom + right - top - left`.
    pub closure: f64,
    pub quadrature_error: f64,
}

pub fn rectangle_loop_closure(fam: &SuperconnectionFamily, s0: f64, cfg: &FlowConfig) -> Result<RectangleLoop> {
    let bottom = r_integral(fam, 0.0, cfg)?;
    let top = r_integral(fam, s0, cfg)?;
    let right = s_integral(fam, 1.0, s0, cfg)?;
    let left = s_integral(fam, 0.0, s0, cfg)?;
    Ok(RectangleLoop {
        s0,
        bottom,
        right,
        top,
        left,
        closure: bottom.value + right.value - top.value - left.value,
        quadrature_error: bottom.error + right.error + top.error + left.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SemifiniteModel;
    use crate::sample::Sampler;

    #[test]
    fn commuting_unitary_gives_zero() {
        let model = SemifiniteModel::new([(3, 1.0)]).unwrap();
        let d = BlockOperator::from_real_diagonal(&[vec![-1.0, 0.5, 2.0]]);
        let u = BlockOperator::new(vec![crate::Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, -1.1),
            Complex64::new(1.0, 0.0),
        ]))]);
        let fam = SuperconnectionFamily::new(&model, &d, &u).unwrap();
        let cfg = FlowConfig::default();
        assert!(sf_doubled_r_integral(&fam, &cfg).unwrap().value.abs() < 1e-12);
        assert!(sf_superconnection_integral(&fam, &cfg).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn rho_identity_holds_pointwise() {
        let model = SemifiniteModel::new([(2, 1.0), (2, 0.6)]).unwrap();
        let mut s = Sampler::new(12);
        let d = s.hermitian(&model, 1.5);
        let u = s.unitary(&model);
        let fam = SuperconnectionFamily::new(&model, &d, &u).unwrap();
        assert!(rho_conjugation_residual(&fam, &[0.0, 0.4, 1.3, 2.5]).unwrap() < 1e-10);
    }
}
