use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature {column} is missing in every row")]
    AllMissing { column: usize },
    #[error("dataset has zero total variance")]
    ZeroVariance,
    #[error("requested {requested} items but only {available} are available")]
    TooMany { requested: usize, available: usize },
    #[error("cluster index {index} out of range for {k} clusters")]
    ClusterIndex { index: usize, k: usize },
    #[error("roulette wheel has zero total fitness")]
    DegenerateRoulette,
    #[error("chromosome has not been evaluated")]
    NotEvaluated,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl ClusterError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ClusterError::InvalidParameter(msg.into())
    }
}
