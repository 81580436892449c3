//! Error type shared by all modules.

/// Errors raised by exact-arithmetic operations.
///
/// `PrecisionUnderflow` and `Internal` indicate that a computation could not
/// be certified at the working precision or that a cross-checked invariant
/// failed; both are bugs or precision-policy violations, never data.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("precision underflow: {0}")]
    PrecisionUnderflow(String),

    #[error("division by non-unit: {0}")]
    NonUnit(String),

    #[error("invalid numerical invariant: {0}")]
    InvalidInvariant(String),

    #[error("not realizable: {0}")]
    NotRealizable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
