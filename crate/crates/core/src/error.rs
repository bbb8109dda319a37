use std::path::PathBuf;

use crate::raster::GridDims;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid dimensions {width}x{height}")]
    InvalidDims { width: usize, height: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: GridDims, found: GridDims },

    #[error("data length {len} does not match {dims}")]
    DataLength { dims: GridDims, len: usize },

    #[error("contour image has no foreground pixels")]
    EmptyContour,

    #[error("input sequence is empty")]
    EmptyInput,

    #[error("pnm: {message} at byte offset {offset}")]
    Pnm { offset: usize, message: String },

    #[error("pnm: image kind does not match requested format {0}")]
    FormatMismatch(&'static str),

    #[error("quantization overflow: value {value} outside [0, {max}]")]
    QuantizationOverflow { value: f64, max: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no cohesive median at h = {h}: {reason}")]
    NoCohesiveMedian { h: f64, reason: &'static str },

    #[error("no markers supplied to watershed")]
    NoMarkers,

    #[error("shape leaves the frame")]
    OutOfFrame,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn pnm(offset: usize, message: impl Into<String>) -> Self {
        Error::Pnm {
            offset,
            message: message.into(),
        }
    }
}
