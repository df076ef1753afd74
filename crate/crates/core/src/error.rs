use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid sizes, shapes or hyperparameters.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index error: qubit {index} out of range for {n_qubits} qubits")]
    Index { index: usize, n_qubits: usize },

    /// Bad call-site input (empty vectors, length mismatches, ...).
    #[error("input error: {0}")]
    Input(String),

    #[error("ingestion error in {path}{}: {message}", location(*row, *column))]
    Ingest {
        path: PathBuf,
        row: Option<usize>,
        column: Option<usize>,
        message: String,
    },

    #[error("dataset error: {0}")]
    Dataset(String),

    /// A caller broke a documented precondition (e.g. anomalous windows handed to training).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(row: Option<usize>, column: Option<usize>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" at column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn ingest(
        path: impl Into<PathBuf>,
        row: Option<usize>,
        column: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        Error::Ingest {
            path: path.into(),
            row,
            column,
            message: message.into(),
        }
    }

    /// Short category name, used for CLI exit codes and error reports.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Index { .. } => "index",
            Error::Input(_) => "input",
            Error::Ingest { .. } => "ingest",
            Error::Dataset(_) => "dataset",
            Error::Contract(_) => "contract",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
        }
    }
}
