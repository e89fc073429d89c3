use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GlgError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GlgError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("estimation failed: {reason}")]
    Estimation { reason: String, diagnostics: Vec<String> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GlgError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        GlgError::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        GlgError::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        GlgError::Parse { context: context.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GlgError::Io { path: path.into(), source }
    }
}
