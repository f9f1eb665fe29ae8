use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the saliency engine, the metrics and the batch harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image has a zero dimension ({height}x{width})")]
    EmptyImage { height: usize, width: usize },

    #[error("expected {expected} channel(s), got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("patch ({row}, {col}) is outside the {rows}x{cols} grid")]
    PatchOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fixation map contains no fixated pixel")]
    NoFixations,

    #[error("map has zero total mass")]
    ZeroMass,

    #[error("sample lengths differ or are too short: {0}")]
    LengthMismatch(String),

    #[error("paired differences have zero variance")]
    DegenerateVariance,

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("every entry of the batch failed; first error: {0}")]
    BatchFailed(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Decode { .. } => "decode",
            Error::UnsupportedFormat(_) => "unsupported_format",
            Error::EmptyImage { .. } => "empty_image",
            Error::ChannelMismatch { .. } => "channel_mismatch",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::PatchOutOfRange { .. } => "patch_out_of_range",
            Error::InvalidConfig(_) => "invalid_config",
            Error::NoFixations => "no_fixations",
            Error::ZeroMass => "zero_mass",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::DegenerateVariance => "degenerate_variance",
            Error::Manifest(_) => "manifest",
            Error::BatchFailed(_) => "batch_failed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
