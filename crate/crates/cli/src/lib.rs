//! Scenario runner for the `sflab` estimators.

pub mod report;
pub mod run;
pub mod scenario;
pub mod suite;

use std::fmt;
use std::fs;
use std::path::Path;

pub use report::Report;
pub use run::{run_scenario, RunOptions, RunOutput, Sample};
pub use scenario::Scenario;
pub use suite::{run_suite, SuiteEntry, SuiteStatus, SuiteSummary};

/// Malformed or unreadable input; maps to exit status 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn load_scenario(path: &Path) -> Result<Scenario, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

pub fn write_samples(path: &Path, samples: &[Sample]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "integrand_value", "cumulative"])?;
    for s in samples {
        w.write_record([s.t.to_string(), s.value.to_string(), s.cumulative.to_string()])?;
    }
    w.flush()
}
