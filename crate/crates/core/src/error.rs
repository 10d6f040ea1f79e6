use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sigma: need 0 < sigma_center ({center}) < sigma_surround ({surround})")]
    InvalidSigma { center: f64, surround: f64 },

    #[error("invalid kernel size {0}: must be at least 2")]
    InvalidSize(usize),

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight {0} outside [0, 1]")]
    Domain(f64),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("checkpoint size mismatch: header says {expected} weights, payload holds {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("not enough images: requested {requested}, available {available}")]
    InsufficientImages { requested: usize, available: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("png: {0}")]
    Png(#[from] png::EncodingError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage/config, 2 data or I/O, 3 numeric or dimension.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 1,
            Error::BadMagic { .. }
            | Error::Truncated { .. }
            | Error::VersionMismatch { .. }
            | Error::SizeMismatch { .. }
            | Error::InsufficientImages { .. }
            | Error::Empty(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Png(_) => 2,
            Error::InvalidSigma { .. }
            | Error::InvalidSize(_)
            | Error::DimensionMismatch { .. }
            | Error::Domain(_)
            | Error::IndexOutOfRange { .. } => 3,
        }
    }
}
