/// A named additive term of an estimator, such as an endpoint correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction {
    pub name: String,
    pub value: f64,
}

/// Result of one estimator: the one-form integral plus its corrections.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorRecord {
    pub name: String,
    pub value: f64,
    pub integral: f64,
    pub corrections: Vec<Correction>,
    pub quadrature_error: f64,
}

impl EstimatorRecord {
    pub fn new(name: impl Into<String>, integral: f64, quadrature_error: f64) -> Self {
        Self {
            name: name.into(),
            value: integral,
            integral,
            corrections: Vec::new(),
            quadrature_error,
        }
    }

    /// Adds `sign·value` to the estimate and records it.
    pub fn with_correction(mut self, name: impl Into<String>, value: f64, error: f64) -> Self {
        self.value += value;
        self.quadrature_error += error;
        self.corrections.push(Correction {
            name: name.into(),
            value,
        });
        self
    }

    /// `|value − oracle|`.
    pub fn discrepancy(&self, oracle: f64) -> f64 {
        (self.value - oracle).abs()
    }
}

/// Every estimator run on one instance, alongside the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    pub oracle_sf: f64,
    pub degenerate: bool,
    pub estimators: Vec<EstimatorRecord>,
    pub constants: Vec<(String, f64)>,
}

impl FlowReport {
    pub fn get(&self, name: &str) -> Option<&EstimatorRecord> {
        self.estimators.iter().find(|e| e.name == name)
    }

    pub fn discrepancy(&self, name: &str) -> Option<f64> {
        self.get(name).map(|e| e.discrepancy(self.oracle_sf))
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.estimators
            .iter()
            .map(|e| e.discrepancy(self.oracle_sf))
            .fold(0.0, f64::max)
    }
}
