use thiserror::Error;

use crate::models::SubsetKey;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum OffError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric cell at row {row}, column `{col}`")]
    NonNumericCell { row: usize, col: String },
    #[error("base feature `{col}` is missing at row {row}")]
    NaInBaseFeature { row: usize, col: String },
    #[error("label column must hold exactly two distinct values, found {0:?}")]
    LabelNotBinary(Vec<String>),
    #[error("feature `{0}` already has unavailable values")]
    AlreadyMissing(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("split leaves an empty part (train {train}, test {test})")]
    EmptySplit { train: usize, test: usize },
    #[error("labels contain a single class")]
    DegenerateLabels,
    #[error("Hessian is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subset {key} has insufficient data ({rows} rows)")]
    InsufficientSubset { key: SubsetKey, rows: usize },
    #[error("no submodel for subset {0}")]
    UnknownSubset(SubsetKey),
    #[error("feature column `{0}` is not binary")]
    NonBinaryFeature(String),
    #[error("conditioning event has zero probability mass")]
    ZeroMassEvent,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has no rows with unavailable optional features")]
    NoMissingRows,
    #[error("scores contain a single class")]
    SingleClass,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl OffError {
    /// True for errors that stem from a malformed configuration rather than the data.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            OffError::Config(_)
                | OffError::Json(_)
                | OffError::InvalidSchema(_)
                | OffError::InvalidParameter(_)
                | OffError::UnknownFeature(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, OffError>;
