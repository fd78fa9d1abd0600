use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("photon pattern {pattern:?} exceeds cutoff {cutoff:?}")]
    OutOfRange { pattern: Vec<usize>, cutoff: Vec<usize> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Probability lost above the Fock cutoff is beyond the hard limit.
    #[error("truncation leak {leak:.3e} exceeds the limit {limit:.0e}; raise the cutoff")]
    LeakTooLarge { leak: f64, limit: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("dense dimension {dim} exceeds the simulation limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
