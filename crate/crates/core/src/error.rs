use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the screening toolkit.
///
/// The variants fall into three broad classes that the CLI maps to distinct
/// exit codes: I/O, configuration, and degenerate or malformed data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("duplicate document id {id:?} (line {line})")]
    DuplicateId { id: String, line: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("degenerate stratification: {0}")]
    DegenerateStratification(String),

    #[error("unlabeled document {0:?} cannot be used for training or evaluation")]
    Unlabeled(String),

    #[error("single-class data: {0}")]
    SingleClass(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("provenance mismatch for {artifact}: model has {expected}, input has {actual}")]
    Provenance {
        artifact: &'static str,
        expected: String,
        actual: String,
    },

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by input files that could not be read or written.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    /// True for errors caused by configuration or configuration files.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidArgument(_))
    }

    /// True when the data cannot support the requested computation, such as
    /// a sample holding only one class.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateStratification(_) | Error::SingleClass(_) | Error::Empty(_)
        )
    }
}
