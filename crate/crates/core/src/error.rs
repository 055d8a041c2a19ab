//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("zero pivot in row {row} (|pivot| = {value:e})")]
    ZeroPivot { row: usize, value: f64 },
    #[error("no factorization available for wavenumber pair ({m}, {n})")]
    MissingFactorization { m: usize, n: usize },
    #[error("no-slip condition violated: max wall velocity {0:e}")]
    NoSlip(f64),
    #[error("non-finite value detected: {0}")]
    NonFinite(String),
    #[error("eigenvalue iteration failed: {0}")]
    Eigen(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidMesh(_) | Error::InvalidParameter(_) | Error::ShapeMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
