use thiserror::Error;

/// Errors raised by the verification engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two independent computations of the same quantity disagreed, or a
    /// structural assertion failed. Always indicates a bug or a violated
    /// precondition; results computed so far must not be trusted.
    #[error("computation integrity failure: {0}")]
    Integrity(String),

    /// The Bernoulli norm is zero, so no candidate set can be built.
    #[error("Bernoulli norm vanishes at level {k}")]
    NormVanishes { k: u32 },

    /// Character values do not embed in the requested prime field.
    #[error("unsupported embedding: {0}")]
    UnsupportedEmbedding(String),

    /// External backend or file I/O failure.
    #[error("i/o error: {0}")]
    Io(String),

    /// Malformed certificate, checkpoint or configuration input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}

macro_rules! integrity {
    ($($arg:tt)*) => { $crate::error::Error::Integrity(format!($($arg)*)) };
}

pub(crate) use domain;
pub(crate) use integrity;
