use std::path::PathBuf;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated its documented range or relationship.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two inputs that must share dimensions do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An operation that needs at least one input got none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{path}: i/o error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: decode error: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: encode error: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// Input image has a bit depth other than 16.
    #[error("{path}: unsupported bit depth {bits}")]
    UnsupportedBitDepth { path: PathBuf, bits: u8 },

    /// Input image is not single-channel.
    #[error("{path}: expected single channel, found {channels}")]
    UnsupportedChannels { path: PathBuf, channels: u8 },

    /// A field dump file failed structural validation.
    #[error("{path}: invalid field dump: {reason}")]
    BadFieldDump { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
