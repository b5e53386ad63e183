use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain [{lo}, {hi}]: endpoints must be finite with lo < hi")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("cannot parse function spec `{input}`: {reason}")]
    SpecParse { input: String, reason: String },

    #[error("function is identically zero on the grid")]
    ZeroFunction,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tolerance {0} outside the open interval (0, 1)")]
    InvalidTolerance(f64),

    #[error("polynomial degree exceeds cap {cap}")]
    DegreeCapExceeded { cap: usize },

    #[error("{what} = {value} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("cut {cut} is not an interior bond of a {n}-qubit state")]
    InvalidCut { cut: usize, n: usize },

    #[error("spectrum is not normalized: sum of squares = {0}")]
    NotNormalized(f64),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported schema version {found}, expected {expected}")]
    SchemaVersionMismatch { found: String, expected: u32 },

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
