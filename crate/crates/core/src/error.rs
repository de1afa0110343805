use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// det(F_s) <= 0.
    SingularDeformation { det: f64 },
    /// The lumen half-width fell to or below the configured minimum.
    ChannelClosure { half_width: f64, min: f64 },
    /// The micro problem did not reach a periodic state within the cycle budget.
    MicroNotPeriodic { cycles: usize, change: f64 },
    /// The reaction-diffusion linear system could not be solved to tolerance.
    LinearSolver { iterations: usize, residual: f64 },
    /// The grid has no node at the requested location.
    GridMisaligned { what: &'static str },
    /// Parareal did not meet its stopping criterion within `max_iters`.
    PararealNotConverged { iterations: usize, change: f64 },
    /// Inconsistent configuration.
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::SingularDeformation { det } => {
                write!(f, "deformation gradient is not invertible (det = {det})")
            }
            Error::ChannelClosure { half_width, min } => write!(
                f,
                "channel closed: half-width {half_width:.6} cm is at or below the minimum {min} cm"
            ),
            Error::MicroNotPeriodic { cycles, change } => write!(
                f,
                "micro problem not periodic after {cycles} cycles (last relative change {change:.3e})"
            ),
            Error::LinearSolver { iterations, residual } => write!(
                f,
                "linear solver failed after {iterations} iterations (relative residual {residual:.3e})"
            ),
            Error::GridMisaligned { what } => write!(f, "grid has no node at {what}"),
            Error::PararealNotConverged { iterations, change } => write!(
                f,
                "parareal not converged after {iterations} iterations (last change {change:.3e})"
            ),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
