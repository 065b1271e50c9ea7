use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("law specification parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("negative mass {value:e} at index {index} exceeds round-off tolerance")]
    NegativeMass { index: usize, value: f64 },

    #[error("no convergence after {iterations} iterations (last total variation {last_tv:e}, tolerance {tol:e})")]
    NonConvergence {
        iterations: usize,
        last_tv: f64,
        tol: f64,
    },

    #[error("integer accumulator saturated: {0}")]
    Saturation(String),

    #[error("malformed pmf csv at line {line}: {message}")]
    PmfCsv { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
