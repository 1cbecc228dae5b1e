use alloc::string::String;

/// Failures raised by the robustness computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("degenerate posterior: {0}")]
    DegeneratePosterior(String),
    #[error("bracketing error: {0}")]
    Bracketing(String),
    /// `D02 l(theta, d)` vanishes or does not exist at the minimizer (assumption 1c).
    #[error("singular second derivative (assumption 1c): {0}")]
    Singular(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("band violation: {0}")]
    BandViolation(String),
    #[error("unsupported loss class: {0}")]
    Unsupported(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
