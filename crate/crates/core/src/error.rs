use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: residual estimate {residual:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { residual: f64, tolerance: f64 },

    /// The antisymmetric mode is undefined when the two sources coincide.
    #[error("antisymmetric eigenmode is degenerate (overlap = {overlap}); use the detection mode instead")]
    DegenerateMode { overlap: f64 },

    #[error("covariance matrix failed the conditioning check")]
    SingularCovariance,

    #[error("finite-difference step {step:e} is unusable at this parameter point")]
    FiniteDifferenceStep { step: f64 },

    #[error("variance {value} is outside the invertible range (maximum {max})")]
    OutOfRange { value: f64, max: f64 },

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("{failed} of {total} realizations failed")]
    ProtocolFailure { failed: usize, total: usize },

    #[error("malformed sample file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}
