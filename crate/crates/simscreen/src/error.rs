use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the
/// pipeline stages: data ingestion, preprocessing, model fitting,
/// explanation, agent training, and experiment orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("malformed row {row}: expected {expected} columns, found {found}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown category index {index} for feature '{feature}' ({count} categories)")]
    UnknownCategory {
        feature: String,
        index: usize,
        count: usize,
    },
    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    BadFractions([f64; 3]),
    #[error("requested {requested} rows but dataset has {available}")]
    TooLarge { requested: usize, available: usize },
    #[error("empty dataset where at least {min} rows are required")]
    EmptyData { min: usize },
    #[error("row width {found} does not match expected {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("{groups} feature groups exceed the exact enumeration bound of {bound}")]
    TooManyGroups { groups: usize, bound: usize },
    #[error("observation kind '{kind}' requires field '{field}'")]
    MissingField { kind: String, field: String },
    #[error("feature '{0}' not present in dataset")]
    MissingFeature(String),
    #[error("not enough rows in the {split} split: need {need}, have {have}")]
    SplitExhausted {
        split: String,
        need: usize,
        have: usize,
    },
    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("observation layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("empty test set")]
    EmptyTestSet,
    #[error("ridge fit is singular (ridge_strength = 0 on a rank-deficient design)")]
    SingularFit,
    #[error("invalid config at '{path}': {message}")]
    ConfigInvalid { path: String, message: String },
    #[error("cache entry format version {found}, expected {expected}")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("corrupt cache entry: {0}")]
    CorruptEntry(String),
    #[error("grid cell {cell}: {source}")]
    GridCell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
