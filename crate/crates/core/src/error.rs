use thiserror::Error;

/// Everything that can go wrong while building, loading or evaluating networks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid network shape: {0}")]
    Shape(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point {point:?} is not covered by the partition")]
    OutOfDomain { point: Vec<f64> },

    #[error("cube side {side} is too small to shrink by {delta}")]
    DegenerateShrink { side: f64, delta: f64 },

    #[error("malformed network at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("declared R = {declared} is smaller than the sampled derivative bound {measured}")]
    RadiusTooSmall { declared: f64, measured: f64 },

    #[error("Taylor constant c = {declared} is violated: sampled ratio reaches {measured}")]
    TaylorConstant { declared: f64, measured: f64 },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
