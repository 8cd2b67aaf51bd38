use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("spectrum is not strictly increasing at level {0}")]
    NonMonotoneSpectrum(usize),

    #[error("operator is not diagonal (max off-diagonal {0:e})")]
    NotDiagonal(f64),

    #[error("grid too coarse: Richardson estimate {estimate:e} for level {level} exceeds {limit:e}")]
    GridTooCoarse { level: usize, estimate: f64, limit: f64 },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("truncation overflow: tail mass {tail_mass:e} at dimension {dim}")]
    TruncationOverflow { dim: usize, tail_mass: f64 },
}

impl Error {
    /// True for numerical failures (as opposed to rejected inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GridTooCoarse { .. }
                | Error::Convergence(_)
                | Error::Quadrature(_)
                | Error::StepSizeUnderflow(_)
                | Error::TruncationOverflow { .. }
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
