use thiserror::Error;

/// Errors raised by the algebra and hierarchy routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A cross-derivative was requested for a generator index beyond the relation table.
    #[error("relation table has {entries} entries, needs index {needed}")]
    DepthExceeded { needed: u32, entries: u32 },

    /// A coefficient below the precision floor was read or required.
    #[error("insufficient precision: need exponent {needed}, floor is {floor}")]
    InsufficientPrecision { needed: i32, floor: i32 },

    #[error("operators have different orientations")]
    OrientationMismatch,

    #[error("operator has a negative main exponent where a differential operator is required")]
    NegativeExponent,

    #[error("operator is not self-adjoint: nonzero coefficient at exponent {exponent}")]
    NotSelfAdjoint { exponent: i32 },

    #[error("unexpected operator shape: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
