use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Exact integer arithmetic left the 128-bit range. Never wraps.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
