use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("non-numeric value {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("class index {class} out of range for {n_classes} classes")]
    ClassOutOfRange { class: usize, n_classes: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("MPS parse error at line {line}: {msg}")]
    MpsParse { line: usize, msg: String },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("no feasible solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
