use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("feature index {0} appears more than once")]
    DuplicateIndex(u32),
    #[error("feature indices are 1-based; found index 0")]
    ZeroIndex,
    #[error("example lies outside the unit L2 ball (norm {norm})")]
    OutsideUnitBall { norm: f64 },
    #[error("update called without a pending prediction for this example")]
    UpdateWithoutPrediction,
    #[error("prefix level {level} outside 1..={n}")]
    PrefixOutOfRange { level: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("line {line}: malformed token {token:?} (token {position})")]
    MalformedToken {
        line: usize,
        position: usize,
        token: String,
    },
    #[error("line {line}: feature index {index} appears more than once")]
    DuplicateFeature { line: usize, index: u32 },
    #[error("line {line}: label {label:?} has no mapping")]
    UnmappedLabel { line: usize, label: String },
    #[error("line {line}: missing label")]
    MissingLabel { line: usize },
    #[error("bad label map {0:?}")]
    BadLabelMap(String),
    #[error("dataset {0} has no examples")]
    EmptyDataset(String),
    #[error("smoothness invariant violated: {0}")]
    Lemma2Violation(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = BoostError> = std::result::Result<T, E>;
