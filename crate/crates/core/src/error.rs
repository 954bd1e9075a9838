use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("{malformed} of {lines} lines malformed; wrong file kind?")]
    DumpFormat { malformed: usize, lines: usize },

    #[error("duplicate thread id {id} (in {first} and {second})")]
    DuplicateThread {
        id: String,
        first: String,
        second: String,
    },

    #[error("unknown tag {tag:?}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    UnknownTag { tag: String, line: Option<usize> },

    #[error("invalid tag set: {0}")]
    TagSet(String),

    #[error("token {surface:?} has no POS tag but the vocabulary needs one")]
    Untagged { surface: String },

    #[error("symbol id {id} outside model space of {size}")]
    SymbolOutOfSpace { id: u32, size: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
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
