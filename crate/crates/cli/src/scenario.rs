//! Scenario files: a model, a path and the estimators to run on it.

use serde::{Deserialize, Serialize};
use sflab::paths::OperatorPath;
use sflab::sample::Sampler;
use sflab::{BlockOperator, Complex64, Mat, SemifiniteModel};

use crate::InputError;

pub const SCHEMA: &str = "sfspec/1";

fn one() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    1e-6
}

fn default_series_tol() -> f64 {
    1e-10
}

fn default_k_max() -> usize {
    400
}

fn default_samples() -> usize {
    400
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    pub path: PathSpec,
    #[serde(default)]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    /// Largest accepted `|estimate − oracle|`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_tol: Option<f64>,
    /// Expected oracle value, if known in advance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_sf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub blocks: Vec<BlockSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub dim: usize,
    pub weight: f64,
}

/// Complex entries are `[re, im]`; matrices are row-major, one per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Explicit {
        blocks: Vec<Vec<Vec<[f64; 2]>>>,
    },
    Diagonal {
        values: Vec<Vec<f64>>,
    },
    /// Random self-adjoint; with `gap`, eigenvalues avoid `(-gap, gap)` and lie in `[-scale, scale]`.
    Random {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap: Option<f64>,
    },
    RandomUnitary,
    /// `diag(-m, …, m)` on a single block of dimension `2m + 1`.
    DiracCircle {
        m: usize,
    },
    /// The cyclic shift `e_k ↦ e_{k+1}` on every block.
    CyclicShift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Constant {
        at: OperatorSpec,
    },
    Linear {
        from: OperatorSpec,
        to: OperatorSpec,
    },
    PiecewiseLinear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        knots: Option<Vec<f64>>,
        points: Vec<OperatorSpec>,
    },
    /// `D_t = D + t(uDu* − D)`.
    Conjugation {
        base: OperatorSpec,
        unitary: OperatorSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Bounded {
        r: f64,
        q: f64,
    },
    UnboundedTheta,
    UnboundedQ {
        q: f64,
    },
    UnboundedEps {
        eps: f64,
    },
    Summable {
        p: f64,
    },
    JloSeries {
        #[serde(default = "default_series_tol")]
        tol: f64,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    JloRIntegral,
    JloSIntegral,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    #[default]
    Start,
    End,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    EtaReconcile {
        eps: f64,
        #[serde(default)]
        at: Endpoint,
    },
    Laplace {
        n: f64,
        #[serde(default)]
        at: Endpoint,
    },
    Cocycle {
        k: usize,
    },
    DuhamelEven {
        n_max: usize,
    },
    RectangleLoop {
        s0: f64,
    },
    DecayTable {
        s0: Vec<f64>,
    },
}

/// Samples of the theta one-form integrand along the path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// A scenario with its operators realized.
pub struct Instance {
    pub model: SemifiniteModel,
    pub path: OperatorPath,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| InputError(format!("invalid scenario: {e}")))?;
        if s.schema != SCHEMA {
            return Err(InputError(format!("unsupported schema {:?}, expected {SCHEMA:?}", s.schema)));
        }
        if !(s.tolerance > 0.0) {
            return Err(InputError(format!("tolerance {} must be positive", s.tolerance)));
        }
        Ok(s)
    }

    pub fn instantiate(&self) -> Result<Instance, InputError> {
        let model = SemifiniteModel::new(self.model.blocks.iter().map(|b| (b.dim, b.weight)))
            .map_err(|e| InputError(format!("model: {e}")))?;
        let mut sampler = Sampler::new(self.seed);
        let mut op = |spec: &OperatorSpec, what: &str| {
            build_operator(&model, spec, &mut sampler).map_err(|e| InputError(format!("{what}: {e}")))
        };
        let path = match &self.path {
            PathSpec::Constant { at } => OperatorPath::constant(self_adjoint(op(at, "at")?, "at")?),
            PathSpec::Linear { from, to } => {
                let a = self_adjoint(op(from, "from")?, "from")?;
                let b = self_adjoint(op(to, "to")?, "to")?;
                OperatorPath::between(&a, &b)
            }
            PathSpec::PiecewiseLinear { knots, points } => {
                let mut values = Vec::with_capacity(points.len());
                for (i, p) in points.iter().enumerate() {
                    let what = format!("points[{i}]");
                    values.push(self_adjoint(op(p, &what)?, &what)?);
                }
                match knots {
                    None => OperatorPath::through(&values),
                    Some(k) if !values.is_empty() => {
                        let base = values[0].clone();
                        let offsets: Vec<BlockOperator> = values.iter().map(|v| v - &base).collect();
                        OperatorPath::piecewise_linear(base, k, &offsets)
                    }
                    Some(_) => return Err(InputError("path: no points given".into())),
                }
            }
            PathSpec::Conjugation { base, unitary } => {
                let d = self_adjoint(op(base, "base")?, "base")?;
                let u = op(unitary, "unitary")?;
                OperatorPath::conjugation(d, u)
            }
        }
        .map_err(|e| InputError(format!("path: {e}")))?;
        Ok(Instance { model, path })
    }
}

fn self_adjoint(x: BlockOperator, what: &str) -> Result<BlockOperator, InputError> {
    x.into_hermitian().map_err(|e| InputError(format!("{what}: {e}")))
}

fn build_operator(model: &SemifiniteModel, spec: &OperatorSpec, sampler: &mut Sampler) -> Result<BlockOperator, String> {
    let dims = model.dims();
    match spec {
        OperatorSpec::Explicit { blocks } => {
            if blocks.len() != dims.len() {
                return Err(format!("{} blocks given, model has {}", blocks.len(), dims.len()));
            }
            let mut out = Vec::with_capacity(blocks.len());
            for (k, (rows, &n)) in blocks.iter().zip(&dims).enumerate() {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(format!("block {k} is not {n}×{n}"));
                }
                out.push(Mat::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])));
            }
            Ok(BlockOperator::new(out))
        }
        OperatorSpec::Diagonal { values } => {
            if values.len() != dims.len() || values.iter().zip(&dims).any(|(v, &n)| v.len() != n) {
                return Err(format!("diagonal does not match block dimensions {dims:?}"));
            }
            Ok(BlockOperator::from_real_diagonal(values))
        }
        OperatorSpec::Random { scale, gap } => {
            if !(*scale > 0.0 && scale.is_finite()) {
                return Err(format!("scale {scale} must be positive"));
            }
            Ok(match gap {
                None => sampler.hermitian(model, *scale),
                Some(g) if *g >= 0.0 && g < scale => sampler.gapped_hermitian(model, -scale, *scale, *g),
                Some(g) => return Err(format!("gap {g} must lie in [0, scale)")),
            })
        }
        OperatorSpec::RandomUnitary => Ok(sampler.unitary(model)),
        OperatorSpec::DiracCircle { m } => {
            if dims != [2 * m + 1] {
                return Err(format!("dirac_circle(m = {m}) needs a single block of dimension {}", 2 * m + 1));
            }
            let values: Vec<f64> = (0..=2 * m).map(|k| k as f64 - *m as f64).collect();
            Ok(BlockOperator::from_real_diagonal(&[values]))
        }
        OperatorSpec::CyclicShift => Ok(BlockOperator::new(
            dims.iter()
                .map(|&n| Mat::from_fn(n, n, |i, j| if i == (j + 1) % n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }))
                .collect(),
        )),
    }
}
