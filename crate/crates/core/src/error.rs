use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),
    #[error("undefined direction: {0}")]
    UndefinedDirection(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy failure: {0}")]
    AccuracyFailure(String),
    #[error("pole in hypergeometric parameters: {0}")]
    Pole(String),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("degenerate boundary value problem: {0}")]
    DegenerateBvp(String),
}

impl Error {
    /// True for errors caused by bad caller input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::InvalidStructure(_)
                | Error::Domain(_)
                | Error::UndefinedDirection(_)
                | Error::Pole(_)
                | Error::UnsupportedCase(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite")))
    }
}
