use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed PPM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported PPM maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("truncated PPM payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("pixel buffer holds {found} bytes, {expected} required")]
    BufferSize { expected: usize, found: usize },

    #[error("coordinates ({x}, {y}) outside a {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("normalized color distance undefined: reference image is entirely black")]
    ZeroReference,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown filter kind `{0}`")]
    UnknownFilter(String),

    #[error("opponent transform matrix is singular")]
    SingularMatrix,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("no images supplied")]
    NoImages,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
