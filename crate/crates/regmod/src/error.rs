use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Invalid instance or suite configuration; `path` locates the offending field.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    /// The requested operation has no exact kernel for this instance family.
    #[error("capability error: {0}")]
    Capability(String),

    /// The catalog has no exact subdifferential-distance formula at this point.
    /// Callers must not treat this as distance zero.
    #[error("no exact subdifferential formula: {0}")]
    NoExactFormula(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("critical set is empty")]
    EmptyCriticalSet,

    #[error("output `{0}` already exists (pass --force to overwrite)")]
    WouldOverwrite(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code mapping used by the CLI: configuration and usage
    /// problems exit 2, everything else exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Usage(_) | Error::DimensionMismatch { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
