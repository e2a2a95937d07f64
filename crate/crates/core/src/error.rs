use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("period must be at least 5, got {0}")]
    PeriodTooSmall(usize),

    #[error("sequence length {len} does not match period {period}")]
    LengthMismatch { len: usize, period: usize },

    #[error("distinguished index n0 = {n0} outside [3, {max}]")]
    IndexOutOfRange { n0: usize, max: usize },

    #[error("{name}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    #[error("malformed potential definition: {0}")]
    MalformedPotential(String),

    #[error("malformed sequence literal on line {line}: {reason}")]
    MalformedSequence { line: usize, reason: String },

    #[error("potential period {potential} differs from functional period {functional}")]
    PeriodMismatch { potential: usize, functional: usize },

    #[error("I is unbounded above: an ascent run escaped with I = {value:e}")]
    UnboundedAbove { value: f64 },

    #[error("no ascent run converged within {max_iters} iterations (best gradient norm {best_grad_norm:e})")]
    NoConvergence {
        max_iters: usize,
        best_grad_norm: f64,
    },
}

pub(crate) fn invalid(name: &'static str, constraint: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        constraint: constraint.into(),
    }
}
