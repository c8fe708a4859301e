use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("not a projection: {0}")]
    NotAProjection(String),

    #[error("subspace is not normalizing: triple ({i},{j},{k}) leaves the span by {residual:.3e}")]
    NotNormalizing {
        i: usize,
        j: usize,
        k: usize,
        residual: f64,
    },

    #[error("support pattern is not normalizing: missing pair ({x},{y})")]
    PatternNotNormalizing { x: usize, y: usize },

    #[error("not a lattice: {0}")]
    NotALattice(String),

    #[error("lattice is not Boolean: {0}")]
    NotBoolean(String),

    #[error("operator not supported by the pattern: entry ({x},{y}) has modulus {value:.3e}")]
    NotSupported { x: usize, y: usize, value: f64 },

    #[error("not a semi-normalizer: conjugation by basis element {index} leaves the algebra by {residual:.3e}")]
    NotSemiNormalizer { index: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical factorization failed: {0}")]
    Numerical(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }
}
