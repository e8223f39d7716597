use thiserror::Error;

/// Errors raised by model loading, training, explanation and counting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("EmptyDataset: no rows to train on")]
    EmptyDataset,

    #[error("SingleClassDataset: both classes must appear in the training data")]
    SingleClassDataset,

    #[error("NonPositiveAlpha: smoothing parameter must be > 0, got {0}")]
    NonPositiveAlpha(f64),

    #[error("DomainMismatch: {0}")]
    DomainMismatch(String),

    #[error("InvalidModel: {0}")]
    InvalidModel(String),

    #[error("ScaleOverflow: {0}")]
    ScaleOverflow(String),

    #[error("NotPredictedPositive: slack {0} does not satisfy the decision rule")]
    NotPredictedPositive(f64),

    #[error("SeedNotWeakPAXp: seed precision {precision} is below threshold {delta}")]
    SeedNotWeakPaxp { precision: String, delta: String },

    #[error("SpaceTooLarge: {points} points exceed the enumeration cap {cap}")]
    SpaceTooLarge { points: u128, cap: u128 },

    #[error("InvalidThreshold: {0}")]
    InvalidThreshold(String),

    #[error("Parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
