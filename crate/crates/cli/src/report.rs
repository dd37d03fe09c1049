//! The JSON report written for each scenario.

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub scenario: Scenario,
    pub settings: Settings,
    pub conventions: Conventions,
    pub oracle: Option<OracleEntry>,
    pub estimators: Vec<EstimatorEntry>,
    pub checks: Vec<CheckEntry>,
    pub failures: Vec<Failure>,
    pub constants: Vec<ConstantEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvEntry>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<Vec<TimingEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    pub tolerance: f64,
    pub quadrature_tol: f64,
    pub kernel_tol: f64,
}

/// Sign and orientation conventions the numbers depend on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub spectral_flow: String,
    pub sign_at_zero: String,
    pub conjugation_path: String,
    pub jlo_unitary: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            spectral_flow: "tau(chi_[0,inf)(D_end)) - tau(chi_[0,inf)(D_start))".into(),
            sign_at_zero: "+1".into(),
            conjugation_path: "D_t = D + t(u D u* - D)".into(),
            jlo_unitary: "family built from u* so that u*^{-1} D u* = u D u*".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub value: f64,
    pub partition_sum: f64,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorEntry {
    pub name: String,
    pub value: f64,
    pub integral: f64,
    pub corrections: Vec<CorrectionEntry>,
    pub quadrature_error: f64,
    pub discrepancy: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub name: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub name: String,
    pub value: f64,
}

/// Re-integration of the CSV samples by the trapezoid rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvEntry {
    pub samples: usize,
    pub quadrature: f64,
    pub quadrature_error: f64,
    pub trapezoid: f64,
    /// `|T_N − T_{N/2}| / 3`.
    pub trapezoid_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub name: String,
    pub ms: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only finite numbers");
        s.push('\n');
        s
    }
}
