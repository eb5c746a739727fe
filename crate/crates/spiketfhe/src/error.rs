use std::path::PathBuf;

/// Errors from file handling and the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] spiketfhe_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("message bound check failed: {0}")]
    Bound(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 bound failure, 3 I/O, 4 bad configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Bound(_) => 2,
            Error::Io { .. } | Error::Format(_) | Error::Json(_) => 3,
            Error::Config(_) | Error::Core(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
