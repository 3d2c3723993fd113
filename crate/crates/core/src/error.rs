use thiserror::Error;

/// Errors raised by the sketching library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size overflow: {0}")]
    SizeOverflow(String),

    #[error("materializing {requested} elements exceeds the size guard of {limit}")]
    SizeGuard { requested: u128, limit: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("column {column} has squared norm {norm_sq} above the radius bound {radius}")]
    RadiusViolation {
        column: usize,
        norm_sq: f64,
        radius: f64,
    },

    #[error("Taylor tail does not reach {target:e} within degree {cap}")]
    DegreeCap { cap: usize, target: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
