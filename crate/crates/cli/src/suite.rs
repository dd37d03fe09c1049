//! Runs every scenario in a directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{load_scenario, run_scenario, InputError, Report, RunOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    InputError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub file: String,
    pub status: SuiteStatus,
    pub oracle: Option<f64>,
    pub max_discrepancy: Option<f64>,
    /// Names of failing estimators and checks, or the input error.
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub input_errors: usize,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteSummary {
    /// 0 if everything passed, 2 if any input was malformed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.input_errors > 0 {
            2
        } else if self.failed > 0 {
            1
        } else {
            0
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<40} {:<12} {:>12} {:>12}\n", "scenario", "status", "oracle", "max |diff|");
        for e in &self.entries {
            let status = match e.status {
                SuiteStatus::Pass => "pass",
                SuiteStatus::Fail => "FAIL",
                SuiteStatus::InputError => "INPUT ERROR",
            };
            let num = |v: Option<f64>, p: bool| match v {
                Some(x) if p => format!("{x:.3e}"),
                Some(x) => format!("{x:.6}"),
                None => "-".into(),
            };
            s.push_str(&format!(
                "{:<40} {:<12} {:>12} {:>12}\n",
                e.file,
                status,
                num(e.oracle, false),
                num(e.max_discrepancy, true)
            ));
            for p in &e.problems {
                s.push_str(&format!("    {p}\n"));
            }
        }
        s.push_str(&format!(
            "{} scenarios: {} passed, {} failed, {} input errors\n",
            self.total, self.passed, self.failed, self.input_errors
        ));
        s
    }
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, InputError> {
    let read = fs::read_dir(dir).map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = read
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn entry_for(file: String, result: &Result<Report, InputError>) -> SuiteEntry {
    match result {
        Err(e) => SuiteEntry {
            file,
            status: SuiteStatus::InputError,
            oracle: None,
            max_discrepancy: None,
            problems: vec![e.to_string()],
        },
        Ok(r) => {
            let mut problems: Vec<String> = r
                .estimators
                .iter()
                .filter(|e| !e.pass)
                .map(|e| format!("{}: value {} discrepancy {:?}", e.name, e.value, e.discrepancy))
                .collect();
            problems.extend(
                r.checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{}: {} ≥ {}", c.name, c.value, c.threshold)),
            );
            problems.extend(r.failures.iter().map(|f| format!("{}: {}", f.name, f.error)));
            if let Some(o) = r.oracle.as_ref().filter(|o| !o.pass) {
                problems.push(format!("oracle {} differs from expected {:?}", o.value, o.expected));
            }
            if let Some(c) = r.csv.as_ref().filter(|c| !c.pass) {
                problems.push(format!("csv trapezoid {} vs quadrature {}", c.trapezoid, c.quadrature));
            }
            SuiteEntry {
                file,
                status: if r.pass { SuiteStatus::Pass } else { SuiteStatus::Fail },
                oracle: r.oracle.as_ref().map(|o| o.value),
                max_discrepancy: r.estimators.iter().filter_map(|e| e.discrepancy).reduce(f64::max),
                problems,
            }
        }
    }
}

/// Runs all `*.json` scenarios in `dir` (sorted by name). Reports go to
/// `out/<stem>.report.json` when `out` is given.
pub fn run_suite(dir: &Path, opts: &RunOptions, out: Option<&Path>) -> Result<SuiteSummary, InputError> {
    let files = scenario_files(dir)?;
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(|e| InputError(format!("{}: {e}", out.display())))?;
    }
    let results: Vec<(String, Result<Report, InputError>)> = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let result = load_scenario(path).and_then(|s| run_scenario(&s, opts)).map(|o| o.report);
            (name, result)
        })
        .collect();
    let mut entries = Vec::with_capacity(results.len());
    for (name, result) in &results {
        if let (Some(out), Ok(report)) = (out, result) {
            let stem = Path::new(name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let target = out.join(format!("{stem}.report.json"));
            fs::write(&target, report.to_json()).map_err(|e| InputError(format!("{}: {e}", target.display())))?;
        }
        entries.push(entry_for(name.clone(), result));
    }
    let count = |s: SuiteStatus| entries.iter().filter(|e| e.status == s).count();
    Ok(SuiteSummary {
        total: entries.len(),
        passed: count(SuiteStatus::Pass),
        failed: count(SuiteStatus::Fail),
        input_errors: count(SuiteStatus::InputError),
        entries,
    })
}
