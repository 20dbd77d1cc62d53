use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("raster data length {actual} does not match {expected}")]
    DataLength { expected: usize, actual: usize },

    #[error("unsupported channel count {0}, expected 1 or 3")]
    Channels(usize),

    #[error("raster is empty")]
    EmptyRaster,

    #[error("unknown label {label} at ({x}, {y})")]
    UnknownLabel { label: u8, x: usize, y: usize },

    #[error("unmapped value {value} at ({x}, {y})")]
    UnmappedValue { value: u8, x: usize, y: usize },

    #[error("invalid label map: {0}")]
    LabelMap(String),

    #[error("non-finite sample coordinate ({0}, {1})")]
    NonFiniteCoordinate(f64, f64),

    #[error("affine transform is singular (determinant {0})")]
    SingularTransform(f64),

    #[error("invalid transform parameters: {0}")]
    TransformParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("{metric} is undefined for class {class}: empty denominator")]
    UndefinedScore { metric: &'static str, class: u8 },

    #[error("sample too small: need at least 2 values per group, got {0} and {1}")]
    SampleTooSmall(usize, usize),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("duplicate score for ({item}, {method}, {metric})")]
    DuplicateScore {
        item: String,
        method: String,
        metric: String,
    },

    #[error("row {row}: {message}")]
    Table { row: usize, message: String },

    #[error("manifest is empty")]
    EmptyManifest,

    #[error("pair {index} failed: {source}")]
    Pair {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        }
    }
}
