use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema violation at key `{key}`: {reason}")]
    SchemaViolation { key: String, reason: String },

    #[error("wallet {0} is already registered")]
    AlreadyRegistered(String),

    #[error("wallet {0} is not an accredited institution")]
    NotAccredited(String),

    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },

    #[error("token {token} is not owned by {claimed}")]
    NotOwner { token: u64, claimed: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("order {0} has expired")]
    Expired(String),

    #[error("integrity violation: {0}")]
    IntegrityViolation(String),

    #[error("operation not supported by the {0} backend")]
    UnsupportedBackend(&'static str),

    #[error("image store unavailable")]
    StoreUnavailable,

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("codec error: {0}")]
    Codec(String),

    #[cfg(feature = "fault-injection")]
    #[error("injected fault at {0:?}")]
    InjectedFault(crate::system::FaultPoint),
}

impl Error {
    pub fn not_found(kind: &'static str, id: impl ToString) -> Self {
        Error::NotFound {
            kind,
            id: id.to_string(),
        }
    }

    pub(crate) fn schema(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::SchemaViolation {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code, shared by the HTTP and CLI surfaces.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::SchemaViolation { .. } => "schema_violation",
            Error::AlreadyRegistered(_) => "already_registered",
            Error::NotAccredited(_) => "not_accredited",
            Error::NotFound { .. } => "not_found",
            Error::NotOwner { .. } => "not_owner",
            Error::InvalidState(_) => "invalid_state",
            Error::Conflict(_) => "conflict",
            Error::Expired(_) => "expired",
            Error::IntegrityViolation(_) => "integrity_violation",
            Error::UnsupportedBackend(_) => "unsupported_backend",
            Error::StoreUnavailable => "store_unavailable",
            Error::Io { .. } => "io",
            Error::Codec(_) => "codec",
            #[cfg(feature = "fault-injection")]
            Error::InjectedFault(_) => "injected_fault",
        }
    }
}
