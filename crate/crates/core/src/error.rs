use thiserror::Error;

use crate::dyadic::DyadicRectangle;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scale {0} exceeds the supported maximum {max}", max = crate::dyadic::MAX_SCALE)]
    ScaleTooLarge(u32),

    #[error("position {position} out of range for scale {scale}")]
    PositionOutOfRange { scale: u32, position: u64 },

    #[error("point {0} lies outside [0, 1)")]
    PointOutOfDomain(f64),

    #[error("cell at scale {cell} is coarser than the interval at scale {interval}")]
    CellTooCoarse { interval: u32, cell: u32 },

    #[error("depth {got} is below the required depth {required}")]
    DepthTooSmall { required: u32, got: u32 },

    #[error("family depths differ: {0} vs {1}")]
    DepthMismatch(u32, u32),

    #[error("coordinate dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("problem size {size} exceeds the cap {cap}")]
    SizeOverCap { size: usize, cap: usize },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("duplicate rectangle in input: {0:?}")]
    DuplicateRectangle(DyadicRectangle),

    #[error("operation requires a nonempty support")]
    EmptySupport,

    #[error("member vector has {got} cells, grid depth {depth} requires {expected}")]
    BadMemberLength { depth: u32, expected: usize, got: usize },

    #[error("matrix is not rectangular")]
    RaggedMatrix,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
