use thiserror::Error;

use crate::norms::NormBracket;

/// Errors raised by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NonHermitian(f64),
    #[error("{0} is not an orthogonal projection")]
    NotProjection(&'static str),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("block {k} out of range 1..={max}")]
    BlockOutOfRange { k: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver failed: {reason}; best bracket [{:.6e}, {:.6e}]", bracket.lower, bracket.upper)]
    SolverFailed { reason: String, bracket: NormBracket },
}

pub type Result<T> = std::result::Result<T, Error>;
