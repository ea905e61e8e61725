use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    /// Bad or inconsistent configuration, including unreadable inputs.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(#[from] pulseforge_core::Error),
}

impl AppError {
    /// 2 for configuration and input problems, 3 for numerical failures,
    /// 1 when an output could not be written.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Parse { .. } => 2,
            AppError::Numerical(_) => 3,
            AppError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Parse { path: path.into(), message: message.into() }
    }
}
