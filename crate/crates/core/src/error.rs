use thiserror::Error;

pub type Result<T, E = KpiError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum KpiError {
    #[error("no complete rows remain after dropping missing values")]
    EmptyResult,
    #[error("dataset has no target column")]
    MissingTarget,
    #[error("dataset still contains missing values (row {row}, column {column})")]
    HasMissing { row: usize, column: String },
    #[error("test fraction {0} is outside (0, 1)")]
    BadFraction(f64),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("width mismatch: expected {expected} features, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("labels contain a single class only")]
    SingleClass,
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("all metric weights are zero")]
    ZeroWeights,
    #[error("invalid weight: {0}")]
    BadWeights(String),
    #[error("training diverged: {0}")]
    NonFinite(String),
    #[error("invalid hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("series has {0} observations; at least 3 are required")]
    SeriesTooShort(usize),
    #[error("need at least 4 values for quartiles, got {0}")]
    TooFewValues(usize),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
