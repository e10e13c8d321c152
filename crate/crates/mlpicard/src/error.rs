//! Crate-wide error type.

/// Errors shared across the solver modules.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A quadrature or polynomial order outside the supported range.
    #[error("order {got} out of range [1, {max}]")]
    InvalidOrder { got: u32, max: u32 },

    /// A time interval with `to < from`.
    #[error("invalid time interval [{from}, {to}]")]
    InvalidInterval { from: f64, to: f64 },

    /// A configuration whose cost would exceed a hard guard.
    #[error("{what} would reach {needed}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// The diffusion matrix could not be inverted along a path.
    #[error("singular diffusion at step {step} (condition estimate {cond:.3e})")]
    SingularDiffusion { step: usize, cond: f64 },

    /// A name not present in the problem registry.
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),

    /// A closed-form solution was requested but the problem has none.
    #[error("problem {0:?} has no closed-form solution")]
    NoClosedForm(String),

    /// An operation restricted to a specific dimension.
    #[error("{what} requires dimension {expected}, got {got}")]
    UnsupportedDimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Evaluation mode does not match the problem (e.g. general mode
    /// without coefficients where they are required).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
