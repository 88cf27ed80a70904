use thiserror::Error;

/// Errors produced by the solvers and set constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("gap {gap} is nearly closed or the gap system is ill-conditioned (rcond {rcond:.3e})")]
    IllConditionedGap { gap: usize, rcond: f64 },

    #[error("quadrature did not converge: equilibrium mass off by {mass_error:.3e}")]
    QuadratureNotConverged { mass_error: f64 },

    #[error("singular boundary integral system")]
    SingularSystem,

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("minimax solver did not converge: relative bracket {bracket:.3e} after {rounds} rounds")]
    NotConverged { bracket: f64, rounds: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
