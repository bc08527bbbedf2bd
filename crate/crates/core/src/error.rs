use alloc::string::String;

use thiserror::Error;

/// Errors raised by the tracking core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The target sits exactly on the sensor origin, so bearing is undefined.
    #[error("zero range between robot and target: bearing is undefined")]
    ZeroRange,

    #[error("zero-length line of sight between robot and target means")]
    ZeroLengthLos,

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("initial robot belief is infeasible: mean lies inside obstacle {0}")]
    InfeasibleStart(usize),

    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
