use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode image {path}: {msg}")]
    Decode { path: PathBuf, msg: String },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("image has zero size")]
    EmptyImage,
    #[error("region selection contains no pixels")]
    EmptySelection,
    #[error("region selection does not fit inside the image")]
    RegionOutOfBounds,
    #[error("malformed .hka line {line}: {msg}")]
    HkaParse { line: usize, msg: String },
    #[error("duplicate index ({h},{k}) at line {line}")]
    DuplicateIndex { h: i32, k: i32, line: usize },
    #[error("no coefficient records found")]
    EmptyHka,
    #[error("fewer than 2 independent peaks")]
    TooFewPeaks,
    #[error("all detected peaks are collinear")]
    CollinearPeaks,
    #[error("rank-deficient lattice refinement")]
    RankDeficient,
    #[error("no coefficients retained above the dynamic-range threshold")]
    EmptyCoefficientSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown symmetry model '{0}'")]
    UnknownModel(String),
    #[error("{model} is not applicable to this lattice metric")]
    MetricMismatch { model: String },
    #[error("coefficient sets share no indices")]
    DisjointIndexSets,
    #[error("ascent test needs k_l >= 2 (got {0})")]
    InvalidAscent(usize),
    #[error("subgroup residual is zero")]
    ZeroResidual,
    #[error("noise estimate needs k >= 2")]
    NoiseUndefined,
    #[error("symmetrization removed every coefficient")]
    EmptyAfterAbsences,
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
