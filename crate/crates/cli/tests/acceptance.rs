use std::f64::consts::PI;
use std::fs;
use std::path::Path as FsPath;
use std::process::{Command, ExitCode};
use std::time::Instant;

use sflab::algebra::{f_q_sup, li_q_norm, log_integral, trace_norm};
use sflab::calculus::{contour_func_calc, contour_g_squared_derivative, func_calc, QuadratureSpec};
use sflab::flow::constants::{c_one_closed_form, c_q, c_rq, c_tilde};
use sflab::flow::{
    eta_gamma_reconcile, eta_invariant, laplace_identity_check, one_form_loop_test, relative_index_exact,
    relative_index_formula, sf_bounded_path, sf_finitely_summable, sf_oracle, sf_unbounded, FlowConfig, OneForm,
    UnboundedVariant,
};
use sflab::jlo::{
    boundary_decay_check, cocycle_antisymmetry_check, decay_onset, duhamel_coefficients, jlo_series_sf, sf_doubled_r_integral,
    sf_superconnection_integral, DuhamelMethod, SuperconnectionFamily,
};
use sflab::paths::{transform_path, OperatorPath, Path};
use sflab::sample::Sampler;
use sflab::{BlockOperator, SemifiniteModel};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn layouts() -> Vec<SemifiniteModel> {
    vec![
        SemifiniteModel::new([(4, 1.0)]).unwrap(),
        SemifiniteModel::new([(3, 1.0), (2, 0.45)]).unwrap(),
        SemifiniteModel::new([(2, 0.3), (3, 1.25), (2, 0.8)]).unwrap(),
    ]
}

fn constants() -> Outcome {
    let c1 = (c_q(1.0).map_err(err)? - c_one_closed_form()).abs();
    ensure(c1 < 1e-12, format!("|C_1 - sqrt(pi)/e| = {c1:.2e}"))?;
    let mut worst: f64 = 0.0;
    for q in [0.6, 0.8, 1.0] {
        worst = worst.max((c_rq(1.5, q).map_err(err)? - c_q(q).map_err(err)?).abs());
    }
    ensure(worst < 1e-10, format!("max |C_(3/2,q) - C_q| = {worst:.2e}"))?;
    let ct = (c_tilde(2.0).map_err(err)? - PI).abs();
    ensure(ct < 1e-12, format!("|C~_1 - pi| = {ct:.2e}"))?;
    Ok(format!("C_1 {c1:.1e}, C_(3/2,q) {worst:.1e}, C~_1 {ct:.1e}"))
}

fn relative_index() -> Outcome {
    let mut s = Sampler::new(11);
    let models = layouts();
    let fs: Vec<(Box<dyn Fn(f64) -> f64>, f64)> = vec![
        (Box::new(|x: f64| x), 1.0),
        (Box::new(|x: f64| x * x.abs().powf(1.5)), 1.0),
        (Box::new(|x: f64| x * x * x), 1.0),
        (
            Box::new(|x: f64| if x == 0.0 { 0.0 } else { x * (-1.0 / (x * x)).exp() }),
            (-1f64).exp(),
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for i in 0..100 {
        let m = &models[i % models.len()];
        let p = s.projection(m);
        let q = s.projection(m);
        let exact = relative_index_exact(m, &p, &q, 1e-9).map_err(err)?;
        if exact != 0.0 {
            nonzero += 1;
        }
        for (f, f1) in &fs {
            let v = relative_index_formula(m, &p, &q, f, *f1).map_err(err)?;
            worst = worst.max((v - exact).abs());
        }
    }
    ensure(worst < 1e-9, format!("max deviation {worst:.2e}"))?;
    Ok(format!("max deviation {worst:.1e}, {nonzero}/100 pairs with non-zero index"))
}

fn random_path(s: &mut Sampler, m: &SemifiniteModel, kind: usize) -> OperatorPath {
    match kind {
        0 => OperatorPath::between(&s.gapped_hermitian(m, -2.0, 2.0, 0.1), &s.gapped_hermitian(m, -2.0, 2.0, 0.1)),
        1 => {
            let pts = [
                s.gapped_hermitian(m, -2.0, 2.0, 0.1),
                s.hermitian(m, 1.5),
                s.gapped_hermitian(m, -2.0, 2.0, 0.1),
            ];
            OperatorPath::through(&pts)
        }
        _ => OperatorPath::conjugation(s.hermitian(m, 1.5), s.unitary(m)),
    }
    .unwrap()
}

fn concordance() -> Outcome {
    let mut s = Sampler::new(23);
    let cfg = FlowConfig::default();
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    let mut fractional = 0;
    let mut count = 0;
    for i in 0..50 {
        let total = 8 + s.index(5);
        let blocks = 1 + s.index(4);
        let m = s.model(total, blocks);
        let kind = i % 3;
        let path = random_path(&mut s, &m, kind);
        let oracle = sf_oracle(&m, &path, &cfg).map_err(err)?.value;
        if oracle.fract().abs() > 1e-9 {
            fractional += 1;
        }
        let mut records = Vec::new();
        let bounded = transform_path(&path);
        for r in [0.0, 1.5] {
            for q in [0.7, 1.0] {
                records.push(sf_bounded_path(&m, &bounded, r, q, &cfg).map_err(err)?);
            }
        }
        let mut variants = vec![UnboundedVariant::Theta, UnboundedVariant::Weak { q: 0.9 }];
        variants.extend([0.25, 1.0, 4.0].map(|eps| UnboundedVariant::Eps { eps }));
        for v in variants {
            records.push(sf_unbounded(&m, &path, v, &cfg).map_err(err)?);
        }
        if kind == 2 {
            for p in [2.0, 2.7] {
                records.push(sf_finitely_summable(&m, &path, p, &cfg).map_err(err)?);
            }
        }
        for rec in records {
            count += 1;
            let d = rec.discrepancy(oracle);
            if !(d <= worst) {
                worst = d;
                worst_name = format!("{} on path {i}", rec.name);
            }
        }
    }
    ensure(worst < 1e-6, format!("max discrepancy {worst:.2e} ({worst_name})"))?;
    ensure(fractional > 0, "no path had a non-integer oracle value".into())?;
    Ok(format!(
        "{count} estimates, max discrepancy {worst:.1e}, {fractional} non-integer oracle values"
    ))
}

fn eta_reconciliation() -> Outcome {
    let mut s = Sampler::new(37);
    let cfg = FlowConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let (total, blocks) = (4 + s.index(5), 1 + s.index(3));
        let m = s.model(total, blocks);
        let kernel = i % 3;
        let mut spectra: Vec<Vec<f64>> = m
            .dims()
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|_| {
                        let v = s.uniform(0.1, 2.0);
                        if s.index(2) == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect();
        let mut placed = 0;
        'outer: for block in spectra.iter_mut() {
            for v in block.iter_mut() {
                if placed == kernel {
                    break 'outer;
                }
                *v = 0.0;
                placed += 1;
            }
        }
        let d = s.with_spectrum(&spectra);
        let eps = [0.5, 1.0, 2.0][(i / 3) % 3];
        let r = eta_gamma_reconcile(&m, &d, eps, &cfg).map_err(err)?;
        ensure(
            (kernel == 0) == (r.kernel_term == 0.0),
            format!("instance {i}: kernel of dimension {kernel} was not detected"),
        )?;
        worst = worst.max(r.residual.abs());
    }
    ensure(worst < 1e-6, format!("max residual {worst:.2e}"))?;
    let one = SemifiniteModel::single(1, 1.0).map_err(err)?;
    let eta = eta_invariant(&one, &BlockOperator::from_real_diagonal(&[vec![1.0]]), 1.0, &cfg).map_err(err)?;
    let erfc1 = 0.157_299_207_050_285_13;
    let dev = (eta.value - erfc1).abs();
    ensure(dev < 1e-9, format!("|eta_1(1) - erfc(1)| = {dev:.2e}"))?;
    Ok(format!("max residual {worst:.1e}, |eta_1(1) - erfc(1)| = {dev:.1e}"))
}

fn one_form_exactness() -> Outcome {
    let mut s = Sampler::new(41);
    let cfg = FlowConfig::default();
    let mut loop_worst: f64 = 0.0;
    let mut fd_worst: f64 = 0.0;
    for i in 0..20 {
        let m = &layouts()[i % 3];
        let (a, b, c) = (s.hermitian(m, 1.0), s.hermitian(m, 1.0), s.hermitian(m, 1.0));
        let triangle = OperatorPath::through(&[a.clone(), b, c, a.clone()]).map_err(err)?;
        for form in [OneForm::Bounded { r: 1.5, q: 1.0 }, OneForm::Bounded { r: 0.0, q: 0.7 }, OneForm::Theta] {
            let res = one_form_loop_test(m, &a, &triangle, &form, &cfg).map_err(err)?;
            loop_worst = loop_worst.max(res.residual).max(res.edge_residual);
            if matches!(form, OneForm::Bounded { .. }) {
                fd_worst = fd_worst.max(res.derivative_residual);
            }
        }
    }
    ensure(loop_worst < 1e-7, format!("max loop residual {loop_worst:.2e}"))?;
    ensure(fd_worst < 1e-6, format!("max finite-difference residual {fd_worst:.2e}"))?;
    Ok(format!("loop {loop_worst:.1e}, finite difference {fd_worst:.1e}"))
}

fn contour() -> Outcome {
    let mut s = Sampler::new(53);
    let spec = QuadratureSpec::with_tol(1e-11);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let m = &layouts()[i % 3];
        let t = if i == 0 {
            let spectra: Vec<Vec<f64>> = m
                .dims()
                .iter()
                .map(|&n| (0..n).map(|j| if j == 0 { 0.0 } else { s.uniform(-1.5, 1.5) }).collect())
                .collect();
            s.with_spectrum(&spectra)
        } else {
            s.hermitian(m, 1.0)
        };
        for c in [0.0, 0.75] {
            for k in [1.0, 1.0 / (2.0 * 0.8)] {
                for b in [0.5, 1.0] {
                    let via_contour = contour_func_calc(&t, c, k, b, &spec).map_err(err)?;
                    let direct = func_calc(&t, |x| {
                        let a = x.abs();
                        if a < 1e-12 {
                            0.0
                        } else {
                            a.powf(-2.0 * c) * (-b * a.powf(-2.0 * k)).exp()
                        }
                    })
                    .map_err(err)?;
                    worst = worst.max(trace_norm(m, &(&via_contour - &direct)).map_err(err)?);
                }
            }
        }
    }
    ensure(worst < 1e-8, format!("max trace-norm deviation {worst:.2e}"))?;

    let mut fd_worst: f64 = 0.0;
    for i in 0..6 {
        let m = &layouts()[i % 3];
        let f = s.hermitian(m, 0.8);
        let x = s.hermitian(m, 1.0);
        for (r, q) in [(0.0, 1.0), (1.5, 0.8)] {
            let g = |y: f64| {
                let a = (1.0 - y * y).abs();
                if a == 0.0 {
                    0.0
                } else {
                    a.powf(-r) * (-a.powf(-1.0 / q)).exp()
                }
            };
            let at = |h: f64| func_calc(&(&f + &x.scale(h)), g);
            let h = 1e-3;
            let fd = &(&(&at(-2.0 * h).map_err(err)? - &at(-h).map_err(err)?.scale(8.0))
                + &at(h).map_err(err)?.scale(8.0))
                - &at(2.0 * h).map_err(err)?;
            let fd = fd.scale(1.0 / (12.0 * h));
            let d = contour_g_squared_derivative(&f, &x, r, q, &spec).map_err(err)?;
            fd_worst = fd_worst.max(trace_norm(m, &(&d - &fd)).map_err(err)?);
        }
    }
    ensure(fd_worst < 1e-6, format!("derivative vs finite difference {fd_worst:.2e}"))?;
    Ok(format!("functional calculus {worst:.1e}, derivative {fd_worst:.1e}"))
}

fn jlo_routes() -> Outcome {
    let mut s = Sampler::new(67);
    let cfg = FlowConfig::default();
    let mut spread: f64 = 0.0;
    let mut even: f64 = 0.0;
    let mut cocycle: f64 = 0.0;
    let mut vanishing = 0;
    for i in 0..20 {
        let dim = 3 + i % 3;
        let blocks = 1 + s.index(2);
        let m = s.model(dim, blocks);
        let d = s.hermitian(&m, 1.0);
        let u = s.unitary(&m);
        let path = OperatorPath::conjugation(d.clone(), u.clone()).map_err(err)?;
        let fam = SuperconnectionFamily::new(&m, &d, &u.adjoint()).map_err(err)?;
        let series = jlo_series_sf(&fam, 1e-10, 400).map_err(err)?;
        ensure(series.converged, format!("instance {i}: series did not converge"))?;
        let routes = [
            sf_oracle(&m, &path, &cfg).map_err(err)?.value,
            0.5 * sf_doubled_r_integral(&fam, &cfg).map_err(err)?.value,
            sf_superconnection_integral(&fam, &cfg).map_err(err)?.value,
            series.value,
        ];
        let hi = routes.iter().cloned().fold(f64::MIN, f64::max);
        let lo = routes.iter().cloned().fold(f64::MAX, f64::min);
        spread = spread.max(hi - lo);
        let c = duhamel_coefficients(&fam, 9, DuhamelMethod::default()).map_err(err)?;
        even = c.coefficients.iter().step_by(2).map(|z| z.norm()).fold(even, f64::max);
        for k in 0..=1 {
            cocycle = cocycle.max(cocycle_antisymmetry_check(&fam, k).map_err(err)?.abs());
        }
        let s0 = decay_onset(&fam);
        let table = boundary_decay_check(&fam, &[s0, s0 + 1.0, s0 + 2.0], 41).map_err(err)?;
        if table.sup.iter().all(|v| *v < 1e-12) {
            vanishing += 1;
        } else {
            ensure(
                table.strictly_decreasing(),
                format!("instance {i}: decay table {:?} is not strictly decreasing", table.sup),
            )?;
        }
    }
    ensure(spread < 1e-6, format!("max route spread {spread:.2e}"))?;
    ensure(even < 1e-10, format!("max even coefficient {even:.2e}"))?;
    ensure(cocycle < 1e-7, format!("max antisymmetry residual {cocycle:.2e}"))?;
    Ok(format!(
        "route spread {spread:.1e}, even {even:.1e}, antisymmetry {cocycle:.1e}, {} decreasing decay tables, {vanishing} identically zero",
        20 - vanishing
    ))
}

fn appendix_inequalities() -> Outcome {
    let mut s = Sampler::new(79);
    let slack = |x: f64| 1e-9 * (1.0 + x.abs());
    let mut checked = 0;
    for i in 0..200 {
        let m = &layouts()[i % 3];
        let (st, su) = (s.uniform(0.1, 3.0), s.uniform(0.1, 3.0));
        let t = s.complex(m, st);
        let u = s.complex(m, su);
        let q = s.uniform(0.1, 0.7);
        let q2 = s.uniform(0.05, 1.0 - q);
        let nt = li_q_norm(m, &t, q).map_err(err)?;
        let nu = li_q_norm(m, &u, q).map_err(err)?;
        let sum = li_q_norm(m, &(&t + &u), q).map_err(err)?;
        ensure(sum <= nt + nu + slack(nt + nu), format!("triangle fails on operator {i}"))?;
        let prod = li_q_norm(m, &(&t * &u), q + q2).map_err(err)?;
        let bound = nt * li_q_norm(m, &u, q2).map_err(err)?;
        ensure(prod <= bound + slack(bound), format!("Hölder fails on operator {i}: {prod} > {bound}"))?;
        let f = f_q_sup(m, &t, q).map_err(err)?;
        ensure(
            (2.0f64 / 3.0).powf(q) * f <= nt + slack(nt) && nt <= f + slack(f),
            format!("sandwich fails on operator {i}: {nt} vs {f}"),
        )?;
        let li = li_q_norm(m, &t, 1.0).map_err(err)?;
        ensure(li >= t.norm() - slack(li), format!("domination fails on operator {i}"))?;
        checked += 1;
    }
    let mut grid = 0;
    for j in 0..=90 {
        let r = 10f64.powf(-3.0 + j as f64 / 10.0);
        let bound = 1.5 * r / (r + std::f64::consts::E).ln();
        ensure(log_integral(r) <= bound, format!("log-integral bound fails at r = {r}"))?;
        grid += 1;
    }
    Ok(format!("{checked} operators, {grid} log-integral grid points"))
}

fn identities() -> Outcome {
    let mut s = Sampler::new(97);
    let cfg = FlowConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let m = &layouts()[i % 3];
        let path = random_path(&mut s, m, i % 3);
        let bounded = transform_path(&path);
        for _ in 0..10 {
            let t = s.uniform(0.0, 1.0);
            let (d, dd) = (path.evaluate(t).map_err(err)?, path.derivative(t).map_err(err)?);
            let (f, df) = (bounded.evaluate(t).map_err(err)?, bounded.derivative(t).map_err(err)?);
            for q in [0.6, 0.8, 1.0] {
                let a = OneForm::Bounded { r: 1.5, q }.apply(m, &f, &df).map_err(err)?;
                let b = OneForm::Weak { q }.apply(m, &d, &dd).map_err(err)?;
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
            }
        }
    }
    ensure(worst < 1e-9, format!("max relative transport residual {worst:.2e}"))?;
    let mut laplace: f64 = 0.0;
    for i in 0..20 {
        let m = &layouts()[i % 3];
        let d = s.hermitian(m, 1.5);
        let n = s.uniform(0.5, 3.0);
        laplace = laplace.max(laplace_identity_check(m, &d, n, &cfg).map_err(err)?);
    }
    ensure(laplace < 1e-9, format!("max Laplace residual {laplace:.2e}"))?;
    Ok(format!("transport {worst:.1e}, Laplace {laplace:.1e}"))
}

fn sflab(args: &[&std::ffi::OsStr]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_sflab")).args(args).output().map_err(err)
}

fn determinism() -> Outcome {
    let scenarios = FsPath::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let tmp = tempfile::tempdir().map_err(err)?;
    let good = tmp.path().join("good");
    fs::create_dir(&good).map_err(err)?;
    for name in ["conjugation_random_0.json", "polygon_random_2.json", "eta_kernel.json"] {
        fs::copy(scenarios.join(name), good.join(name)).map_err(err)?;
    }
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = tmp.path().join(format!("run{run}.json"));
        let o = sflab(&["run".as_ref(), good.join("conjugation_random_0.json").as_os_str(), "--out".as_ref(), out.as_os_str()])?;
        ensure(o.status.success(), format!("run exited with {:?}", o.status.code()))?;
        outputs.push(fs::read(&out).map_err(err)?);
    }
    ensure(outputs[0] == outputs[1], "reports of two identical runs differ".into())?;

    let suite = |dir: &FsPath, out: &FsPath| -> Result<Option<i32>, String> {
        Ok(sflab(&["suite".as_ref(), dir.as_os_str(), "--out".as_ref(), out.as_os_str()])?.status.code())
    };
    let (o1, o2) = (tmp.path().join("s1"), tmp.path().join("s2"));
    ensure(suite(&good, &o1)? == Some(0), "passing suite did not exit 0".into())?;
    ensure(suite(&good, &o2)? == Some(0), "passing suite did not exit 0".into())?;
    for entry in fs::read_dir(&o1).map_err(err)? {
        let name = entry.map_err(err)?.file_name();
        let a = fs::read(o1.join(&name)).map_err(err)?;
        let b = fs::read(o2.join(&name)).map_err(err)?;
        ensure(a == b, format!("suite output {name:?} differs between runs"))?;
    }

    let mut wrong: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(good.join("eta_kernel.json")).map_err(err)?).map_err(err)?;
    wrong["expect_sf"] = serde_json::json!(3.0);
    fs::write(good.join("wrong_expectation.json"), wrong.to_string()).map_err(err)?;
    let code = suite(&good, &tmp.path().join("s3"))?;
    ensure(code == Some(1), format!("suite with a failing scenario exited {code:?}"))?;
    fs::write(good.join("broken.json"), "{ \"schema\": ").map_err(err)?;
    let code = suite(&good, &tmp.path().join("s4"))?;
    ensure(code == Some(2), format!("suite with a malformed scenario exited {code:?}"))?;
    Ok("byte-identical reports, suite exit codes 0/1/2".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("constants", constants),
        ("relative index", relative_index),
        ("estimator concordance", concordance),
        ("eta reconciliation", eta_reconciliation),
        ("one-form exactness", one_form_exactness),
        ("contour calculus", contour),
        ("graded-space routes", jlo_routes),
        ("Li^q inequalities", appendix_inequalities),
        ("transport and Laplace identities", identities),
        ("determinism and exit codes", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome = run();
        let secs = clock.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {detail} ({secs:.2} s)", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
