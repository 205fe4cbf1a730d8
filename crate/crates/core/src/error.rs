use thiserror::Error;

/// Errors raised by planning and execution.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FftError {
    #[error("twiddle order must be at least 1")]
    ZeroOrder,
    #[error("transform size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("transform size {0} is below the minimum of 2")]
    SizeTooSmall(usize),
    #[error("transform size {0} exceeds the maximum of 2^24")]
    SizeTooLarge(usize),
    #[error("signal length {actual} does not match plan size {expected}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("size {n} fits a single threadgroup (b_max = {b_max}); no four-step split needed")]
    NoSplitNeeded { n: usize, b_max: usize },
    #[error("matrix of {rows}x{cols} does not hold {len} elements")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
    #[error("plan for n = {0} is not a single-threadgroup plan")]
    NotSingleThreadgroup(usize),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid hardware model: {0}")]
    InvalidHardware(String),
    #[error("unsupported element size of {0} bytes")]
    UnsupportedElementBytes(usize),
}

pub type Result<T, E = FftError> = std::result::Result<T, E>;
