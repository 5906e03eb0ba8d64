use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] idlink_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    /// Any error while reading or writing a specific file.
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: Box<Error> },

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("acceptance checks failed: {0}")]
    Assertion(String),
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::Io { path: PathBuf::new(), source }
    }
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        match self {
            Error::Io { path: p, source } if p.as_os_str().is_empty() => Error::Io { path, source },
            other => Error::File { path, source: Box::new(other) },
        }
    }
}
