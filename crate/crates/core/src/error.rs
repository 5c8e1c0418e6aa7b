use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("candidate index {index} out of range for a ground set of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("candidate {0} is already part of the selection")]
    AlreadyChosen(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("instance too large for exhaustive search: {subsets} subsets exceed the limit of {limit}")]
    InstanceTooLarge { subsets: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, DesignError>;
