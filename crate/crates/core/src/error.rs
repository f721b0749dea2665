//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by evaluation, inversion and certification routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("imaginary part is not positive definite")]
    NotPositiveDefinite,

    #[error("smallest eigenvalue {lambda1:e} of Im(tau) is below the floor {floor:e}")]
    LambdaBelowFloor { lambda1: f64, floor: f64 },

    #[error("lemma hypotheses do not hold: {0}")]
    WrongRegime(String),

    #[error("root signs are ambiguous at the current precision (component {component})")]
    AmbiguousRoots { component: usize },

    #[error("roots are not in good position")]
    NotInGoodPosition,

    #[error("Borchardt iteration did not converge after {steps} steps")]
    NoConvergence { steps: usize },

    #[error("Borchardt failure for gamma_{k}: {source}")]
    Borchardt { k: usize, source: Box<Error> },

    #[error("sign of z3 cannot be resolved: {0}")]
    SignResolutionFailed(String),

    #[error("could not calibrate kappa: {0}")]
    KappaCalibration(String),

    #[error("Newton iteration diverged at {prec} bits")]
    NewtonDiverged { prec: u32 },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    /// True for errors raised by the Borchardt/AGM machinery.
    pub fn is_borchardt(&self) -> bool {
        matches!(
            self,
            Error::AmbiguousRoots { .. }
                | Error::NotInGoodPosition
                | Error::NoConvergence { .. }
                | Error::Borchardt { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
