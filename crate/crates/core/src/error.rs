use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not expanding")]
    NotExpanding,

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid digit set: {0}")]
    InvalidDigits(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        needed: u64,
        cap: u64,
    },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("direct sum collision: {a1} + {b1} = {a2} + {b2}")]
    Collision { a1: i64, b1: i64, a2: i64, b2: i64 },

    #[error("no set B with A + B equal to the given sum")]
    NoCancellation,

    #[error("segment lengths differ: {first} vs {other}")]
    SegmentLengthMismatch { first: i64, other: i64 },

    #[error("invalid segment set: {0}")]
    InvalidSegments(String),
}

impl Error {
    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "not_square",
            Error::Empty(_) => "empty",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Singular => "singular",
            Error::NotExpanding => "not_expanding",
            Error::Overflow(_) => "overflow",
            Error::InvalidDigits(_) => "invalid_digits",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ResourceCap { .. } => "resource_cap",
            Error::Degenerate(_) => "degenerate",
            Error::Collision { .. } => "collision",
            Error::NoCancellation => "no_cancellation",
            Error::SegmentLengthMismatch { .. } => "segment_length_mismatch",
            Error::InvalidSegments(_) => "invalid_segments",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
