use thiserror::Error;

/// Errors raised by tensor construction, algebra and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid mode {mode} for tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    #[error("non-finite entry at storage position {0}")]
    NonFinite(usize),

    #[error("tensor is not cubical: {0:?}")]
    NotCubical(Vec<usize>),

    #[error("invalid rank: {0}")]
    InvalidRank(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

impl From<serde_json::Error> for TensorError {
    fn from(e: serde_json::Error) -> Self {
        TensorError::Format(e.to_string())
    }
}

impl From<std::io::Error> for TensorError {
    fn from(e: std::io::Error) -> Self {
        TensorError::Io(e.to_string())
    }
}
