use thiserror::Error;

/// Crate-wide error type. Precondition breaches surface as `Contract`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("query cap exceeded: {used} queries used, cap {cap}")]
    QueryCapExceeded { used: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for `Error::Contract` with a formatted message.
macro_rules! contract {
    ($cond:expr, $($arg:tt)*) => {
        if !($cond) {
            return Err($crate::error::Error::Contract(format!($($arg)*)));
        }
    };
}
pub(crate) use contract;
