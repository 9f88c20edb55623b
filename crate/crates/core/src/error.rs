use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value violates its invariant. Carries the key name.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: &'static str, reason: String },

    /// Vector or matrix dimensions do not line up.
    #[error("shape mismatch: expected {expected}, got {actual} ({context})")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A non-finite value showed up where a finite one was required.
    #[error("numeric error: {0}")]
    Numeric(&'static str),

    /// Physical state contains NaN or infinity.
    #[error("invalid state: {0}")]
    InvalidState(&'static str),

    /// An operation was called out of order, e.g. stepping a failed state.
    #[error("protocol violation: {0}")]
    Protocol(&'static str),

    /// A function argument is outside its domain.
    #[error("invalid argument: {0}")]
    Argument(&'static str),

    /// A serialized snapshot could not be parsed.
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            key,
            reason: reason.into(),
        }
    }
}
