use super::{BlockOperator, SemifiniteModel};
use crate::error::Result;

/// One constant piece of a singular value function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub width: f64,
    pub value: f64,
}

/// The decreasing right-continuous step function `t ↦ μ_t(S)`.
///
/// In a weighted block model every singular value of block `i` occupies an
/// interval of length `w_i`, and the function is the decreasing
/// rearrangement of these pieces. It vanishes beyond `τ(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularValueFunction {
    steps: Vec<Step>,
}

impl SingularValueFunction {
    /// Builds the rearrangement from `(width, value)` pairs in any order.
    /// Adjacent pieces with equal values are merged; zero values are dropped.
    pub fn from_pieces<I>(pieces: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = pieces
            .into_iter()
            .filter(|&(w, v)| w > 0.0 && v > 0.0)
            .collect();
        raw.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut steps: Vec<Step> = Vec::with_capacity(raw.len());
        for (width, value) in raw {
            match steps.last_mut() {
                Some(last) if last.value == value => last.width += width,
                _ => steps.push(Step { width, value }),
            }
        }
        Self { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// `μ_0`, which is the operator norm.
    pub fn sup(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.value)
    }

    /// Length of the support.
    pub fn support_width(&self) -> f64 {
        self.steps.iter().map(|s| s.width).sum()
    }

    /// Right endpoints of the steps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.steps
            .iter()
            .map(|s| {
                acc += s.width;
                acc
            })
            .collect()
    }

    /// `μ_t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.steps {
            acc += s.width;
            if t < acc {
                return s.value;
            }
        }
        0.0
    }

    /// `∫₀ˣ μ_t dt`.
    pub fn integral_to(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut total = 0.0;
        for s in &self.steps {
            if x <= acc {
                break;
            }
            let len = (x - acc).min(s.width);
            total += len * s.value;
            acc += s.width;
        }
        total
    }

    /// `∫₀^∞ f(μ_t) dt` for `f(0) = 0`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.steps.iter().map(|s| s.width * f(s.value)).sum()
    }

    /// The function `t ↦ μ_t^p`, i.e. `μ(|S|^p)`.
    pub fn powf(&self, p: f64) -> Self {
        Self {
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    width: s.width,
                    value: s.value.powf(p),
                })
                .collect(),
        }
    }
}

/// `μ_t(S)` for an operator in the model.
pub fn singular_values(model: &SemifiniteModel, s: &BlockOperator) -> Result<SingularValueFunction> {
    model.check(s)?;
    let mut pieces = Vec::with_capacity(model.total_dim());
    for (b, m) in model.blocks().iter().zip(s.blocks()) {
        for sv in m.clone().singular_values().iter() {
            pieces.push((b.weight, *sv));
        }
    }
    Ok(SingularValueFunction::from_pieces(pieces))
}
