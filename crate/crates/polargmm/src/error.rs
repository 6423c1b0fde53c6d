use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty basis: no Bessel root admitted under the truncation bound")]
    EmptyBasis,

    #[error("zero variance: input stack has no variation to decompose")]
    ZeroVariance,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("image side mismatch: expected {expected}, got {got}")]
    ImageSideMismatch { expected: usize, got: usize },

    #[error("requested {requested} components but only {available} basis functions available")]
    NotEnoughComponents { requested: usize, available: usize },

    #[error("undefined AE-2/TE-2: no jointly assigned sample pair")]
    NoJointPairs,

    #[error("{path}: malformed row at line {line}: {reason}")]
    MalformedRow {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: bad file format: {reason}")]
    BadFormat { path: String, reason: String },

    #[error("row count mismatch between {left} ({left_n} rows) and {right} ({right_n} rows)")]
    RowCountMismatch {
        left: String,
        left_n: usize,
        right: String,
        right_n: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
