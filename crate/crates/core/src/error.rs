use thiserror::Error;

/// Errors raised by the solver pipeline and the CLI front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("particular solution vanishes on the grid (min |f| = {min_abs:e})")]
    NonVanishing { min_abs: f64 },

    #[error("could not construct a non-vanishing particular solution (best min |f| = {min_abs:e})")]
    Construction { min_abs: f64 },

    #[error("particular solution residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("least-squares system is rank deficient: effective rank {effective_rank} < {requested}; lower N")]
    Conditioning { effective_rank: usize, requested: usize },

    #[error("formal powers overflow at order {order}; lower N or use more segments")]
    Overflow { order: usize },

    #[error("boundary condition degenerates at omega = {re}{im:+}i (|alpha| + |beta| = 0)")]
    InvalidBoundaryCondition { re: f64, im: f64 },

    #[error("kernel and formal-power table come from different particular solutions")]
    MismatchedBasis,

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("convergence failure: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Construction,
    Convergence,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_)
            | Error::Domain { .. }
            | Error::InvalidBoundaryCondition { .. }
            | Error::Parse { .. }
            | Error::UnknownIdentifier(_)
            | Error::Config(_) => ErrorCategory::Config,
            Error::NonVanishing { .. }
            | Error::Construction { .. }
            | Error::Residual { .. }
            | Error::Conditioning { .. }
            | Error::Overflow { .. }
            | Error::MismatchedBasis => ErrorCategory::Construction,
            Error::Convergence(_) => ErrorCategory::Convergence,
        }
    }
}
