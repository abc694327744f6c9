use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("unsupported channel layout: {0}")]
    UnsupportedChannels(String),

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero target dimension")]
    ZeroDimension,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("proportion {0} outside [0, 1]")]
    ProportionOutOfRange(f64),

    #[error("empty source directory: {0}")]
    EmptySource(PathBuf),

    #[error("uninpaintable: no known region")]
    Uninpaintable,

    #[error("nothing to reconstruct: no patch contains missing pixels")]
    NothingToReconstruct,

    #[error("image too small: {0}")]
    TooSmall(String),

    #[error("need at least {needed} vectors, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("segmenter error: {0}")]
    Segmenter(String),

    #[error("report error: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
