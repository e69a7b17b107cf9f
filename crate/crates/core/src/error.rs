use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised by the library.
///
/// [`Error::is_numeric`] separates numerical failures (non-convergence,
/// ill-conditioning, exhausted resampling) from invalid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("variable count {0} out of range 1..=16")]
    VariableCount(usize),

    #[error("variable x{index} exceeds the variable count {n}")]
    VariableOutOfRange { index: u32, n: usize },

    #[error("expression is not in C_N: it contains the unbounded atom a_[N]")]
    NotBounded,

    #[error("expression is not a lattice element (∪/∩ of variables)")]
    NotLattice,

    #[error("expression is not read-once: {0}")]
    NotReadOnce(String),

    #[error("sign structure violated for pair ({i},{j}): {reason}")]
    SignStructure { i: usize, j: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("points are not in general position: {0}")]
    GeneralPosition(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ill-conditioned system (condition number {0:e})")]
    IllConditioned(f64),

    #[error("resampling cap exceeded: {0}")]
    ResampleCap(String),

    #[error("no contraction step accepted after {0} proposals")]
    NoAcceptedMove(usize),
}

impl Error {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::IllConditioned(_)
                | Error::ResampleCap(_)
                | Error::NoAcceptedMove(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
