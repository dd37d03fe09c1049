//! Executes one scenario.

use std::time::Instant;

use rayon::prelude::*;
use sflab::calculus::QuadratureSpec;
use sflab::flow::constants::{c_q, c_rq, c_tilde};
use sflab::flow::{
    eta_gamma_reconcile, laplace_identity_check, sf_bounded_path, sf_finitely_summable, sf_oracle, sf_unbounded,
    EstimatorRecord, FlowConfig, OneForm, UnboundedVariant,
};
use sflab::jlo::{
    boundary_decay_check, cocycle_antisymmetry_check, duhamel_coefficients, jlo_series_sf, rectangle_loop_closure,
    sf_doubled_r_integral, sf_superconnection_integral, DuhamelMethod, SuperconnectionFamily,
};
use sflab::paths::{transform_path, Path};

use crate::report::*;
use crate::scenario::{CheckSpec, Endpoint, EstimatorSpec, Instance, Scenario};
use crate::InputError;

pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub timing: bool,
}

/// One row of the integrand CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub value: f64,
    pub cumulative: f64,
}

pub struct RunOutput {
    pub report: Report,
    pub samples: Option<Vec<Sample>>,
}

enum Outcome {
    Estimator(EstimatorRecord),
    Check(CheckEntry),
}

fn estimator_label(spec: &EstimatorSpec) -> String {
    match spec {
        EstimatorSpec::Bounded { r, q } => format!("bounded_path(r={r},q={q})"),
        EstimatorSpec::UnboundedTheta => UnboundedVariant::Theta.label(),
        EstimatorSpec::UnboundedQ { q } => UnboundedVariant::Weak { q: *q }.label(),
        EstimatorSpec::UnboundedEps { eps } => UnboundedVariant::Eps { eps: *eps }.label(),
        EstimatorSpec::Summable { p } => format!("finitely_summable(p={p})"),
        EstimatorSpec::JloSeries { .. } => "jlo_series".into(),
        EstimatorSpec::JloRIntegral => "jlo_r_integral".into(),
        EstimatorSpec::JloSIntegral => "jlo_s_integral".into(),
    }
}

fn check_label(spec: &CheckSpec) -> String {
    let at = |e: &Endpoint| match e {
        Endpoint::Start => "start",
        Endpoint::End => "end",
    };
    match spec {
        CheckSpec::EtaReconcile { eps, at: e } => format!("eta_reconcile(eps={eps},at={})", at(e)),
        CheckSpec::Laplace { n, at: e } => format!("laplace(n={n},at={})", at(e)),
        CheckSpec::Cocycle { k } => format!("cocycle_antisymmetry(k={k})"),
        CheckSpec::DuhamelEven { n_max } => format!("duhamel_even(n_max={n_max})"),
        CheckSpec::RectangleLoop { s0 } => format!("rectangle_loop(s0={s0})"),
        CheckSpec::DecayTable { s0 } => format!("decay_table(s0={s0:?})"),
    }
}

struct Context<'a> {
    inst: &'a Instance,
    cfg: FlowConfig,
    family: Result<SuperconnectionFamily, String>,
}

impl Context<'_> {
    fn family(&self) -> Result<&SuperconnectionFamily, String> {
        self.family.as_ref().map_err(|e| e.clone())
    }

    fn endpoint(&self, e: Endpoint) -> Result<sflab::BlockOperator, String> {
        match e {
            Endpoint::Start => self.inst.path.start(),
            Endpoint::End => self.inst.path.end(),
        }
        .map_err(|e| e.to_string())
    }

    fn estimator(&self, spec: &EstimatorSpec) -> Result<EstimatorRecord, String> {
        let (model, path, cfg) = (&self.inst.model, &self.inst.path, &self.cfg);
        let s = |e: sflab::Error| e.to_string();
        match spec {
            EstimatorSpec::Bounded { r, q } => sf_bounded_path(model, &transform_path(path), *r, *q, cfg).map_err(s),
            EstimatorSpec::UnboundedTheta => sf_unbounded(model, path, UnboundedVariant::Theta, cfg).map_err(s),
            EstimatorSpec::UnboundedQ { q } => sf_unbounded(model, path, UnboundedVariant::Weak { q: *q }, cfg).map_err(s),
            EstimatorSpec::UnboundedEps { eps } => {
                sf_unbounded(model, path, UnboundedVariant::Eps { eps: *eps }, cfg).map_err(s)
            }
            EstimatorSpec::Summable { p } => sf_finitely_summable(model, path, *p, cfg).map_err(s),
            EstimatorSpec::JloSeries { tol, k_max } => {
                let series = jlo_series_sf(self.family()?, *tol, *k_max).map_err(s)?;
                if !series.converged {
                    return Err(format!(
                        "series did not converge within k_max = {k_max} (last partial sum {})",
                        series.value
                    ));
                }
                let tail = series.partial_sums.windows(2).last().map_or(0.0, |w| (w[1] - w[0]).abs());
                Ok(EstimatorRecord::new("jlo_series", series.value, tail))
            }
            EstimatorSpec::JloRIntegral => {
                let e = sf_doubled_r_integral(self.family()?, cfg).map_err(s)?;
                Ok(EstimatorRecord::new("jlo_r_integral", 0.5 * e.value, 0.5 * e.error))
            }
            EstimatorSpec::JloSIntegral => {
                let e = sf_superconnection_integral(self.family()?, cfg).map_err(s)?;
                Ok(EstimatorRecord::new("jlo_s_integral", e.value, e.error))
            }
        }
    }

    fn check(&self, spec: &CheckSpec) -> Result<CheckEntry, String> {
        let (model, cfg) = (&self.inst.model, &self.cfg);
        let s = |e: sflab::Error| e.to_string();
        let (value, threshold) = match spec {
            CheckSpec::EtaReconcile { eps, at } => {
                let r = eta_gamma_reconcile(model, &self.endpoint(*at)?, *eps, cfg).map_err(s)?;
                (r.residual.abs(), 1e-6)
            }
            CheckSpec::Laplace { n, at } => (laplace_identity_check(model, &self.endpoint(*at)?, *n, cfg).map_err(s)?, 1e-9),
            CheckSpec::Cocycle { k } => (cocycle_antisymmetry_check(self.family()?, *k).map_err(s)?.abs(), 1e-7),
            CheckSpec::DuhamelEven { n_max } => {
                let c = duhamel_coefficients(self.family()?, *n_max, DuhamelMethod::default()).map_err(s)?;
                let even = c.coefficients.iter().step_by(2).map(|z| z.norm()).fold(0.0, f64::max);
                (even, 1e-10)
            }
            CheckSpec::RectangleLoop { s0 } => {
                (rectangle_loop_closure(self.family()?, *s0, cfg).map_err(s)?.closure.abs(), 1e-6)
            }
            CheckSpec::DecayTable { s0 } => {
                if s0.len() < 2 || s0.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
                    return Err("decay table needs an increasing list of at least two positive s0".into());
                }
                let t = boundary_decay_check(self.family()?, s0, 41).map_err(s)?;
                let ratio = t.sup.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
                if !ratio.is_finite() {
                    return Err(format!("degenerate decay table {:?}", t.sup));
                }
                (ratio, 1.0)
            }
        };
        Ok(CheckEntry {
            name: check_label(spec),
            value,
            threshold,
            pass: value < threshold,
        })
    }
}

fn constants_for(specs: &[EstimatorSpec]) -> Vec<ConstantEntry> {
    let mut out: Vec<ConstantEntry> = Vec::new();
    let mut push = |name: String, v: sflab::Result<f64>| {
        if let Ok(value) = v {
            if !out.iter().any(|c| c.name == name) {
                out.push(ConstantEntry { name, value });
            }
        }
    };
    for spec in specs {
        match spec {
            EstimatorSpec::Bounded { r, q } => push(format!("C_rq(r={r},q={q})"), c_rq(*r, *q)),
            EstimatorSpec::UnboundedQ { q } => push(format!("C_q(q={q})"), c_q(*q)),
            EstimatorSpec::UnboundedTheta => push("C_rq(r=1.5,q=1)".into(), c_rq(1.5, 1.0)),
            EstimatorSpec::Summable { p } => push(format!("C_tilde(p={p})"), c_tilde(*p)),
            _ => {}
        }
    }
    out
}

fn integrand_samples(inst: &Instance, n: usize, cfg: &FlowConfig) -> Result<(Vec<Sample>, CsvEntry), String> {
    if n < 2 || n % 2 != 0 {
        return Err(format!("csv samples = {n} must be even and at least 2"));
    }
    let s = |e: sflab::Error| e.to_string();
    let (a, b) = inst.path.domain();
    let h = (b - a) / n as f64;
    let form = OneForm::Theta;
    let mut rows = Vec::with_capacity(n + 1);
    let mut cumulative = 0.0;
    let mut prev = 0.0;
    for i in 0..=n {
        let t = a + i as f64 * h;
        let x = inst.path.evaluate(t).map_err(s)?;
        let dx = inst.path.derivative(t).map_err(s)?;
        let value = form.apply(&inst.model, &x, &dx).map_err(s)?;
        if i > 0 {
            cumulative += 0.5 * h * (prev + value);
        }
        prev = value;
        rows.push(Sample { t, value, cumulative });
    }
    let coarse: f64 = rows
        .iter()
        .step_by(2)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| h * (w[0].value + w[1].value))
        .sum();
    let quad = form.integrate(&inst.model, &inst.path, cfg).map_err(s)?;
    let trapezoid_error = (cumulative - coarse).abs() / 3.0;
    let entry = CsvEntry {
        samples: n,
        quadrature: quad.value,
        quadrature_error: quad.error,
        trapezoid: cumulative,
        trapezoid_error,
        pass: (cumulative - quad.value).abs() <= 10.0 * quad.error.max(trapezoid_error),
    };
    Ok((rows, entry))
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

/// Runs every estimator and check of `scenario`.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput, InputError> {
    let mut effective = scenario.clone();
    if let Some(seed) = opts.seed {
        effective.seed = seed;
    }
    let tolerance = opts.tolerance.unwrap_or(scenario.tolerance);
    if !(tolerance > 0.0) {
        return Err(InputError(format!("tolerance {tolerance} must be positive")));
    }
    let quad_tol = scenario.quadrature_tol.unwrap_or(DEFAULT_QUADRATURE_TOL);
    let quad = QuadratureSpec::with_tol(quad_tol);
    quad.validate().map_err(|e| InputError(format!("quadrature_tol: {e}")))?;
    let inst = effective.instantiate()?;
    let cfg = FlowConfig {
        quad,
        ..FlowConfig::default()
    };
    let family = match inst.path.conjugating_unitary() {
        Some(u) => SuperconnectionFamily::new(&inst.model, inst.path.base(), &u.adjoint()).map_err(|e| e.to_string()),
        None => Err("the JLO routes need a conjugation path".to_string()),
    };
    let ctx = Context { inst: &inst, cfg, family };

    let mut timing = Vec::new();
    let mut failures = Vec::new();
    let clock = Instant::now();
    let oracle = match sf_oracle(&inst.model, &inst.path, &cfg) {
        Ok(o) => {
            let pass = scenario.expect_sf.is_none_or(|e| (e - o.value).abs() <= tolerance);
            Some(OracleEntry {
                value: o.value,
                partition_sum: o.partition_sum,
                degenerate: o.degenerate,
                expected: scenario.expect_sf,
                pass,
            })
        }
        Err(e) => {
            failures.push(Failure {
                name: "oracle".into(),
                error: e.to_string(),
            });
            None
        }
    };
    timing.push(TimingEntry {
        name: "oracle".into(),
        ms: clock.elapsed().as_secs_f64() * 1e3,
    });

    let tasks: Vec<(String, Result<Outcome, String>, f64)> = scenario
        .estimators
        .par_iter()
        .map(|spec| {
            let clock = Instant::now();
            let r = ctx.estimator(spec).map(Outcome::Estimator);
            (estimator_label(spec), r, clock.elapsed().as_secs_f64() * 1e3)
        })
        .chain(scenario.checks.par_iter().map(|spec| {
            let clock = Instant::now();
            let r = ctx.check(spec).map(Outcome::Check);
            (check_label(spec), r, clock.elapsed().as_secs_f64() * 1e3)
        }))
        .collect();

    let mut estimators = Vec::new();
    let mut checks = Vec::new();
    for (name, outcome, ms) in tasks {
        timing.push(TimingEntry { name: name.clone(), ms });
        match outcome {
            Ok(Outcome::Estimator(rec)) if finite(rec.value) && finite(rec.quadrature_error) => {
                let discrepancy = oracle.as_ref().map(|o| rec.discrepancy(o.value));
                estimators.push(EstimatorEntry {
                    pass: discrepancy.is_some_and(|d| d <= tolerance),
                    name: rec.name,
                    value: rec.value,
                    integral: rec.integral,
                    corrections: rec
                        .corrections
                        .into_iter()
                        .map(|c| CorrectionEntry {
                            name: c.name,
                            value: c.value,
                        })
                        .collect(),
                    quadrature_error: rec.quadrature_error,
                    discrepancy,
                });
            }
            Ok(Outcome::Check(c)) if finite(c.value) => checks.push(c),
            Ok(_) => failures.push(Failure {
                name,
                error: "non-finite result".into(),
            }),
            Err(error) => failures.push(Failure { name, error }),
        }
    }

    let (samples, csv) = match scenario.csv {
        None => (None, None),
        Some(spec) => match integrand_samples(&inst, spec.samples, &cfg) {
            Ok((rows, entry)) => (Some(rows), Some(entry)),
            Err(error) => {
                failures.push(Failure {
                    name: "csv".into(),
                    error,
                });
                (None, None)
            }
        },
    };

    let pass = failures.is_empty()
        && oracle.as_ref().is_some_and(|o| o.pass)
        && estimators.iter().all(|e| e.pass)
        && checks.iter().all(|c| c.pass)
        && csv.as_ref().is_none_or(|c| c.pass);

    let report = Report {
        schema: crate::scenario::SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: scenario.clone(),
        settings: Settings {
            seed: effective.seed,
            tolerance,
            quadrature_tol: quad_tol,
            kernel_tol: cfg.kernel_tol,
        },
        conventions: Conventions::default(),
        oracle,
        estimators,
        checks,
        failures,
        constants: constants_for(&scenario.estimators),
        csv,
        pass,
        timing_ms: opts.timing.then_some(timing),
    };
    Ok(RunOutput { report, samples })
}
