use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    MagicMismatch { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),

    #[error("truncated file: needed {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },

    #[error("non-finite value at payload index {0}")]
    NonFiniteValue(usize),

    #[error("classifier weight row {0} has zero norm")]
    ZeroNormRow(usize),

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("pixel set is empty")]
    EmptyPixelSet,

    #[error("need at least {k} points, got {points}")]
    TooFewPoints { points: usize, k: usize },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("soft assignments cover different pixel sets or cluster counts")]
    PixelSetMismatch,

    #[error("no valid prototypes")]
    NoValidPrototypes,

    #[error("transport plan columns do not match prototype layout: {0}")]
    IndexMismatch(String),

    #[error("exact solver limited to N*P <= {limit}, got {size}")]
    InstanceTooLarge { size: usize, limit: usize },

    #[error("transport plan row {0} carries no mass")]
    ZeroMassRow(usize),

    #[error("invalid marginals: {0}")]
    InvalidMarginals(String),

    #[error("no foreground classes")]
    NoForegroundClasses,

    #[error("malformed PGM: {0}")]
    MalformedPgm(String),

    #[error("manifest line {line}: {message}")]
    ManifestParse { line: usize, message: String },

    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),

    #[error("value for {key:?} out of range, expected {bound}")]
    ValueOutOfRange { key: String, bound: String },

    #[error("cannot parse value {value:?} for {key:?}")]
    InvalidValue { key: String, value: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
