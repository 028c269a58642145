use std::path::PathBuf;

/// Errors produced by any part of the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A feature value fell outside the unit interval required by the bases.
    #[error("value {value} at row {row}, column {col} is outside [0, 1]")]
    OutOfDomain { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("labels must be 0 or 1, found {found} at index {index}")]
    NonBinaryLabel { index: usize, found: String },

    /// Refused outright: the intercept of a logistic fit diverges when only
    /// one class is present.
    #[error("labels contain a single class; refusing to fit")]
    SingleClass,

    #[error("invalid penalty weights: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("cross-validation folds degenerate: {0}")]
    DegenerateFolds(String),

    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("model serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
