use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimensionality mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid data type: {0}")]
    InvalidDataType(String),

    #[error("invalid tiling: {0}")]
    InvalidTiling(String),

    #[error("illegal tiling: dependence crosses tiles backward (tile offset {offset:?})")]
    IllegalTiling { offset: Vec<i64> },

    #[error("invalid problem instance: {0}")]
    InvalidProblem(String),

    #[error("invalid config at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("too many MARS for the exact layout solver: {0} > {max}", max = crate::layout::MAX_EXACT_MARS)]
    TooManyMars(usize),

    #[error("truncated bit stream: wanted {wanted} bits at {pos}, only {len} available")]
    Truncated { pos: usize, wanted: usize, len: usize },

    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    #[error("corrupt block: {0}")]
    CorruptBlock(String),

    #[error("MARS index {index} out of range ({count} MARS)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("transfer length {0} bits is not a multiple of the bus width")]
    UnalignedTransfer(u64),

    #[error("invalid bus configuration: {0}")]
    InvalidBus(String),

    #[error("address {addr} out of bounds (buffer holds {len} words)")]
    AddressOutOfBounds { addr: usize, len: usize },

    #[error("block of tile {tile:?} overflows its allocation ({needed} > {capacity} bytes)")]
    AllocationOverflow {
        tile: Vec<i64>,
        needed: usize,
        capacity: usize,
    },

    #[error("missing block or markers for producer tile {0:?}")]
    MissingProducer(Vec<i64>),

    #[error("original layout cannot hold the footprint of tile {0:?}: two versions alias one cell")]
    FootprintAlias(Vec<i64>),

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
