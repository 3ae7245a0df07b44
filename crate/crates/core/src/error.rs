//! Error type shared by all modules.

/// Errors produced by the planning library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input value violates a precondition; `name` identifies the field
    /// or argument.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The inputs are outside the domain where the physical model applies.
    #[error("model domain violated: {0}")]
    ModelDomain(String),

    /// A hover height at which the harvested power cannot cover the user's
    /// circuit power.
    #[error("hover height {height} m infeasible in {mode} mode: must be below {bound} m")]
    InfeasibleHeight {
        mode: &'static str,
        height: f64,
        bound: f64,
    },

    /// A scenario or subproblem admits no feasible solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Problem size exceeds a hard limit (e.g. exhaustive search guard).
    #[error("{what}: size {size} exceeds limit {limit}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    /// An iterative solver failed to produce a usable answer.
    #[error("solver failure: {0}")]
    Solver(String),

    /// Scenario parsing or validation failed.
    #[error("scenario error: {0}")]
    Scenario(String),
}

impl Error {
    pub fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
