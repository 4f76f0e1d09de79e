use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("element {element}: non-positive Jacobian determinant {det_j:e}")]
    InvertedElement { element: usize, det_j: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular matrix: zero pivot at dof {dof}")]
    SingularMatrix { dof: usize },
    #[error(
        "iterative solver stopped after {iterations} iterations at relative residual {residual:e}"
    )]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{field}: value {value:e} at node {node} is below the round-off clipping tolerance")]
    NegativeValue {
        field: &'static str,
        node: usize,
        value: f64,
    },
    #[error("flux limiter produced {value:e} outside [{min:e}, {max:e}] at node {node}")]
    BoundViolation {
        node: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("growth stretch base {base:e} is non-positive")]
    GrowthBaseNonPositive { base: f64 },
    #[error("fiber exponent {argument:e} overflows")]
    FiberOverflow { argument: f64 },
    #[error("deformation Jacobian {det:e} is non-positive")]
    InvertedDeformation { det: f64 },
    #[error(
        "Newton iteration did not converge in {iterations} iterations (residual {residual:e})"
    )]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("output sink failed: {0}")]
    OutputFailed(String),
    #[error("time step {dt:e} fell below minimum {dt_min:e}: {cause}")]
    StepTooSmall {
        dt: f64,
        dt_min: f64,
        cause: alloc::boxed::Box<Error>,
    },
}

impl Error {
    /// Errors after which the coupled driver may retry the step with a
    /// smaller time increment.
    pub fn is_step_rejection(&self) -> bool {
        matches!(
            self,
            Error::GrowthBaseNonPositive { .. }
                | Error::FiberOverflow { .. }
                | Error::InvertedDeformation { .. }
                | Error::NewtonDiverged { .. }
                | Error::SingularMatrix { .. }
        )
    }
}
