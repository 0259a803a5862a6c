use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BiclusterError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BiclusterError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: input is empty")]
    EmptyInput(String),

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("degenerate bicluster: {rows} row(s) x {cols} column(s) selected, need at least 2 x 2")]
    DegenerateBicluster { rows: usize, cols: usize },

    #[error("empty selection: bicluster selects no {0}")]
    EmptySelection(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown search strategy `{0}`")]
    UnknownStrategy(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl BiclusterError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BiclusterError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        BiclusterError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input (files, flags, formats)
    /// rather than by the search itself.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            BiclusterError::Io { .. }
                | BiclusterError::Parse { .. }
                | BiclusterError::EmptyInput(_)
                | BiclusterError::InvalidParameter(_)
                | BiclusterError::UnknownStrategy(_)
                | BiclusterError::Serialization(_)
        )
    }
}

impl From<csv::Error> for BiclusterError {
    fn from(e: csv::Error) -> Self {
        BiclusterError::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for BiclusterError {
    fn from(e: serde_json::Error) -> Self {
        BiclusterError::Serialization(e.to_string())
    }
}
