use thiserror::Error;

/// Errors raised by the comb algebra and the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("non-convergent pairing: {0}")]
    NonConvergent(String),

    #[error("derivative order {order} exceeds the precomputed limit {limit}")]
    OrderTooHigh { order: u32, limit: u32 },

    #[error("singular lattice basis")]
    SingularLattice,

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
