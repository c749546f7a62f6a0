//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by the exit code the CLI maps them to: schema and
/// config problems (2), protocol / privacy-gate violations (3), and numeric
/// failures (4).
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates its declared schema.
    #[error("schema violation: {0}")]
    Schema(String),

    /// Invalid configuration or arguments.
    #[error("config error: {0}")]
    Config(String),

    /// Federation protocol violation, including privacy-gate denials.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Numeric failure (divergence, NaN/Inf, singular matrix).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI surface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Config(_) => 2,
            Error::Protocol(_) => 3,
            Error::Numeric(_) => 4,
            Error::Io(_) | Error::Csv(_) | Error::Serialize(_) => 2,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<bincode::Error> for Error {
    fn from(e: bincode::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
