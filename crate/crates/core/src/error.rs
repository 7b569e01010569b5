//! Crate-wide error type and the process exit codes the CLI maps it to.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record failed to parse; `line` is 1-based within the file.
    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A parsed record violates a domain invariant.
    #[error("invariant violated for {subject}: {message}")]
    Invariant { subject: String, message: String },

    /// File or model versions / feature schemas do not line up.
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("cannot parse url {url:?}: {message}")]
    Url { url: String, message: String },

    #[error("provider {provider}: {message}")]
    Provider { provider: String, message: String },

    /// Dataset unusable for the requested operation (empty, one class, ...).
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invariant(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            subject: subject.into(),
            message: message.into(),
        }
    }

    /// Exit code contract: 0 success, 2 missing/unreadable input, 3 schema
    /// mismatch, 4 invariant violation, 5 provider failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Schema { .. } => 2,
            Error::SchemaMismatch { .. } => 3,
            Error::Invariant { .. } => 4,
            Error::Provider { .. } => 5,
            Error::InvalidConfig(_) | Error::InvalidParams(_) => 1,
            Error::Url { .. } | Error::Degenerate(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
