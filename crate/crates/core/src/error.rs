use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm vector: cosine similarity is undefined")]
    ZeroNorm,

    #[error("non-finite value in input")]
    NonFinite,

    #[error("need at least {required} values, got {actual}")]
    TooFew { required: usize, actual: usize },

    #[error("correlation undefined: rank variance is zero")]
    UndefinedCorrelation,

    #[error("matrix is all zeros")]
    ZeroMatrix,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid embedding format: {0}")]
    Format(String),

    #[error("invalid bias specification: {0}")]
    Spec(String),

    #[error("set {set} has no terms in the vocabulary")]
    EmptyAfterFilter { set: String },

    #[error("metric {metric}: {message}")]
    Metric { metric: String, message: String },

    #[error("metric {metric} requires an explicit bias specification")]
    IncompatibleMetric { metric: String },

    #[error("invalid debiasing sequence: {0}")]
    InvalidSequence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable identifier for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroNorm => "zero_norm",
            Error::NonFinite => "non_finite",
            Error::TooFew { .. } => "too_few",
            Error::UndefinedCorrelation => "undefined_correlation",
            Error::ZeroMatrix => "zero_matrix",
            Error::Shape(_) => "shape",
            Error::Parse { .. } => "parse_error",
            Error::Format(_) => "format_error",
            Error::Spec(_) => "invalid_spec",
            Error::EmptyAfterFilter { .. } => "empty_set",
            Error::Metric { .. } => "metric_error",
            Error::IncompatibleMetric { .. } => "incompatible_metric",
            Error::InvalidSequence(_) => "invalid_method",
            Error::Io(_) => "io_error",
            Error::Json(_) => "invalid_json",
        }
    }

    pub(crate) fn metric(metric: &str, err: impl std::fmt::Display) -> Self {
        Error::Metric {
            metric: metric.to_string(),
            message: err.to_string(),
        }
    }
}
