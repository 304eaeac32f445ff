use thiserror::Error;

/// Failures surfaced by the solver pipeline.
///
/// Variants split into user-facing input problems and numerical failures;
/// [`Error::is_numerical`] is what the command line tool maps to its exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("subdomain {subdomain} has non-positive map determinant {det:e}")]
    InvertedSubdomain { subdomain: usize, det: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{failed} of {total} full-order solves failed; first failure: {first}")]
    TooManyFailures { failed: usize, total: usize, first: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::Diverged { .. }
                | Error::InvertedSubdomain { .. }
                | Error::TooManyFailures { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
