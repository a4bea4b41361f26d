use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error(
        "receiver R^T R is singular (minimum eigenvalue {min_eigenvalue:e} below floor {floor:e})"
    )]
    SingularReceiver { min_eigenvalue: f64, floor: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("target posterior covariance lies outside [O, sigma0] (violation {violation:e})")]
    InfeasibleTarget { violation: f64 },

    #[error("prior covariance is singular")]
    SingularPrior,

    #[error("matrix is not an orthogonal projection (eigenvalue {eigenvalue} not in {{0, 1}})")]
    NotProjection { eigenvalue: f64 },

    #[error("W lies outside [O, I] (eigenvalue {eigenvalue})")]
    InfeasibleW { eigenvalue: f64 },

    #[error("shrinkage delta {delta} must lie in [0, {inradius})")]
    InvalidShrinkage { delta: f64, inradius: f64 },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("receiver type #{index} rejected: {reason}")]
    InvalidType { index: usize, reason: String },

    #[error("need at least 3 positive points for a fit, got {0}")]
    InsufficientData(usize),

    #[error("trial {trial} (horizon {horizon}): {source}")]
    Trial {
        trial: usize,
        horizon: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{}: {source}", path.display())]
    Read {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Reads a whole text file, naming it in the error.
pub fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}
