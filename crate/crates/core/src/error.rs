use thiserror::Error;

/// Errors produced by the library. Most indicate caller bugs (mismatched
/// lengths, invalid parameters); `PowerIterationStalled` is the only one
/// reachable from well-formed input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty signal or dataset")]
    Empty,

    #[error("{divisor} does not divide the signal length {n}")]
    NotDivisible { n: usize, divisor: usize },

    #[error("coset index {t} out of range 0..{n_cosets}")]
    CosetOutOfRange { t: usize, n_cosets: usize },

    #[error("invalid factorization: {n_cosets} * {oversampling} != {n}")]
    BadFactorization {
        n: usize,
        n_cosets: usize,
        oversampling: usize,
    },

    #[error("data frame of length {len} is shorter than one symbol period ({s} samples)")]
    FrameTooShort { len: usize, s: usize },

    #[error("dataset not centered; call pca::center first")]
    NotCentered,

    #[error("degenerate (all-zero) data")]
    DegenerateData,

    #[error("zero vector has no phase")]
    ZeroVector,

    #[error("pulse is not shift-orthonormal (coset energy deviation {deviation:.3e})")]
    NotShiftOrthonormal { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("power iteration failed to converge and dense fallback was degenerate")]
    PowerIterationStalled,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
