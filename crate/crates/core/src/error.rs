use alloc::string::String;

use num_complex::Complex64;

use crate::wavefunction::HardyClass;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("evaluation point {at} collides with a pole at {pole}")]
    PoleHit { at: Complex64, pole: Complex64 },

    #[error("evaluation point {at} is the branch point")]
    BranchPointHit { at: Complex64 },

    #[error("quadrature did not converge: estimate {estimate:e} above tolerance {tolerance:e}")]
    NonConvergence { estimate: f64, tolerance: f64 },

    #[error("residue at {at} depends on the circle radius or the pole is not simple")]
    InconsistentResidue { at: Complex64 },

    #[error("point {at} lies outside the analyticity half-plane of a {class} function")]
    WrongHalfPlane { at: Complex64, class: HardyClass },

    #[error("expected a {expected} test function, got {found}")]
    ClassMismatch { expected: HardyClass, found: HardyClass },

    #[error("decay order {order} is below the required {required}")]
    DecayTooSlow { order: u32, required: u32 },

    #[error("time {t} is outside the semigroup domain")]
    TimeDirectionViolation { t: f64 },

    #[error("pole {pole} lies on the integration path")]
    PoleOnPath { pole: Complex64 },

    #[error("all couplings vanish")]
    ZeroCoupling,

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
