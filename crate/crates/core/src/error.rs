use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not self-adjoint (defect {defect:.3e}, norm {norm:.3e})")]
    NotSelfAdjoint { defect: f64, norm: f64 },

    #[error("operator is not an orthogonal projection (defect {0:.3e})")]
    NotProjection(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("quadrature did not reach tolerance: estimate {value:.6e} with error {error:.3e} after {subdivisions} subdivisions")]
    Quadrature {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("simplex chain of length {len} exceeds the limit {max}")]
    ChainTooLong { len: usize, max: usize },

    #[error("endpoints are not unitarily equivalent (spectral gap {0:.3e})")]
    SpectrumMismatch(f64),

    #[error("path is not continuous at t = {0}")]
    Discontinuous(f64),

    #[error("series did not converge after {terms} terms (last term {last:.3e})")]
    NoConvergence { terms: usize, last: f64 },
}
