use thiserror::Error;

/// Errors raised by the transport, collision, dynamics and moment routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates an operation precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A model or simulation configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Two inputs have incompatible sizes.
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    /// Two inputs live in different dimensions.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// A solver reached a state that valid inputs cannot produce.
    #[error("internal solver error: {0}")]
    Internal(String),

    /// Snapshot or table I/O failure.
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
