use thiserror::Error;

use crate::velocity::PlanePoint;

/// Failures raised by field evaluation, integration and the map analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The velocity field is undefined (or numerically meaningless) at the
    /// requested point because it sits on, or too close to, a vortex.
    #[error("velocity undefined near vortex at ({x}, {y}), t = {t}")]
    VortexProximity { x: f64, y: f64, t: f64 },

    #[error("degenerate superposition state: {0}")]
    DegenerateState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A trajectory entered the vortex cutoff disc.
    #[error("trajectory captured by vortex at t = {t}")]
    VortexCapture { t: f64, last: PlanePoint },

    #[error("step limit exceeded at t = {t}")]
    StepLimit { t: f64, last: PlanePoint },

    /// Step size fell below the configured minimum.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, last: PlanePoint },

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular jacobian (det(J - I) = {det:e})")]
    SingularJacobian { det: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable upper-case name of the variant, as used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Self::VortexProximity { .. } => "VORTEX_PROXIMITY",
            Self::DegenerateState(_) => "DEGENERATE_STATE",
            Self::InvalidArgument(_) => "INVALID_ARGUMENT",
            Self::VortexCapture { .. } => "VORTEX_CAPTURE",
            Self::StepLimit { .. } => "STEP_LIMIT",
            Self::StepUnderflow { .. } => "STEP_UNDERFLOW",
            Self::NoConvergence { .. } => "NO_CONVERGENCE",
            Self::SingularJacobian { .. } => "SINGULAR_JACOBIAN",
        }
    }
}
