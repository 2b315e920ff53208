use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("retained branch gives non-positive energy {energy} at n = {n}")]
    NonPositiveEnergy { n: u64, energy: f64 },

    #[error("saturation threshold {eps} not reached for n <= {cap}")]
    NotReached { eps: f64, cap: u64 },

    #[error(
        "quadrature did not converge after {refinements} refinements \
         (value {value:e}, error estimate {error_estimate:e})"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        refinements: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
