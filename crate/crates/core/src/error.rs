use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = RwnError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RwnError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty input: no data rows")]
    EmptyFile,

    #[error("line {line}: expected {expected} fields, found {found}")]
    MalformedRow { line: u64, expected: usize, found: usize },

    #[error("line {line}, column `{column}`: cannot parse `{token}` as a finite number")]
    UnparseableNumber { line: u64, column: String, token: String },

    #[error("line {line}, column `{column}`: label `{label}` is not a declared category")]
    UnknownCategory { line: u64, column: String, label: String },

    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: &'static str, reason: String },

    #[error("record index {index} out of range for {len} records")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid pair ({i}, {j}): ranks require 1 <= i < j")]
    InvalidPair { i: u64, j: u64 },

    #[error("pair sample of {requested} exceeds the {total} available pairs")]
    TooManyPairs { requested: u64, total: u64 },

    #[error("partition {partition} has {size} records; at least 2 are required")]
    PartitionTooSmall { partition: usize, size: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },
}

impl RwnError {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        RwnError::Config {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by parameter values rather than by the data.
    pub fn is_config(&self) -> bool {
        matches!(self, RwnError::Config { .. } | RwnError::TooManyPairs { .. })
    }

    pub fn is_io(&self) -> bool {
        match self {
            RwnError::Io { .. } => true,
            RwnError::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
