use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by integration, step control and certification.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A state or matrix had the wrong dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// The implicit stage equations did not converge; the step is too large.
    StageSolveDiverged { residual: f64, iterations: usize },
    /// A required estimator (gamma, local Lipschitz bound, ...) is missing
    /// and no numeric fallback was enabled.
    MissingEstimator(&'static str),
    /// The Lyapunov function has no Hessian but the operation needs one.
    MissingHessian,
    /// A controller proposed a step that is not strictly positive and finite.
    ControllerFault { step: f64 },
    /// The halving controller ran out of halvings without passing the
    /// decrease test.
    HalvingExhausted { halvings: u32, last_step: f64 },
    /// The reference integrator could not reach the requested tolerance.
    OracleFailure { steps: usize, error_estimate: f64 },
    /// A parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// `K * dz >= c`: the advection chain would lose its decay margin.
    CflViolation { k_dz: f64, speed: f64 },
    /// A sampled hypothesis check failed (e.g. `a_i(y) >= L_i`).
    HypothesisViolated(&'static str),
    /// The constraint matrix has dependent rows.
    RankDeficient,
    /// A linear system was singular.
    Singular,
    /// An iterative method stopped making progress.
    Stall { iterations: usize, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::StageSolveDiverged {
                residual,
                iterations,
            } => write!(
                f,
                "stage equations did not converge after {iterations} iterations (residual {residual:e}); step too large"
            ),
            Error::MissingEstimator(what) => {
                write!(f, "missing estimator `{what}` and no numeric fallback enabled")
            }
            Error::MissingHessian => write!(f, "Lyapunov function has no Hessian"),
            Error::ControllerFault { step } => {
                write!(f, "controller proposed a non-positive or non-finite step {step}")
            }
            Error::HalvingExhausted {
                halvings,
                last_step,
            } => write!(
                f,
                "decrease test still failing after {halvings} halvings (last step {last_step:e}); Lyapunov pairing likely invalid here"
            ),
            Error::OracleFailure {
                steps,
                error_estimate,
            } => write!(
                f,
                "reference integrator failed to reach tolerance with {steps} steps (estimate {error_estimate:e})"
            ),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::CflViolation { k_dz, speed } => write!(
                f,
                "K*dz = {k_dz} is not below the advection speed {speed}"
            ),
            Error::HypothesisViolated(what) => write!(f, "hypothesis violated: {what}"),
            Error::RankDeficient => write!(f, "constraint matrix is rank deficient"),
            Error::Singular => write!(f, "singular linear system"),
            Error::Stall {
                iterations,
                residual,
            } => write!(
                f,
                "iteration stalled after {iterations} steps (residual {residual:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}
