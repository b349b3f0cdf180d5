use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range 0..{len}")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("matrix is not positive definite (min eigenvalue {min:e}, max {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("matrix is singular to working precision ({0})")]
    Singular(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
