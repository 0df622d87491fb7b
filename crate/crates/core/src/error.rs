use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates the operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or root finder did not reach its tolerance.
    #[error("numerical failure: {message} (best estimate {estimate:e})")]
    Numerical { message: String, estimate: f64 },

    /// The classical cross section diverges at the fold angle. The divergence
    /// is integrable with the attached power-law exponent.
    #[error("caustic divergence at theta = {theta} (fold at {theta_max}, exponent {exponent})")]
    CausticDivergence {
        theta: f64,
        theta_max: f64,
        exponent: f64,
    },

    /// The forward direction is excluded from the evaluation grid.
    #[error(
        "forward direction excluded: |theta| = {theta:e} is inside the exclusion radius {eps:e}"
    )]
    ForwardExclusion { theta: f64, eps: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            estimate,
        }
    }

    /// True for non-convergence failures, false for precondition violations.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}
