use thiserror::Error;

use crate::lattice::Direction;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed image file; `field` names the header token or section at fault.
    #[error("format error in {field}: {message}")]
    Format { field: &'static str, message: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty signal")]
    EmptySignal,

    #[error("singular generator matrix {0:?}")]
    SingularMatrix([[i64; 2]; 2]),

    #[error("unsupported direction ({}, {})", .0.a(), .0.b())]
    UnsupportedDirection(Direction),

    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("metric undefined: reference image is identically zero")]
    UndefinedMetric,

    #[error(transparent)]
    Load(#[from] LoadError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(field: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            field,
            message: message.into(),
        }
    }
}

/// Failures while decoding a persisted training set.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("bad magic: expected \"DSR1\"")]
    BadMagic,
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("training set truncated: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed training set: {0}")]
    Malformed(String),
}
