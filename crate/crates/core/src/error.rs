use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of {what} at {at}")]
    Pole { what: &'static str, at: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("boundary matrix is singular: |det A| = {det:.3e} is below the floor {floor:.1e}")]
    SingularMatrix { det: f64, floor: f64 },
    #[error("forcing order {lambda} violates the admissible window: {reason}")]
    Window { lambda: f64, reason: String },
    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),
    #[error("zero extension inflates the norm by {ratio:.3} (> 2)")]
    NormInflation { ratio: f64 },
    #[error("unresolved signal: {0}")]
    Resolution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors caused by invalid user configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. }
                | Error::Domain(_)
                | Error::InvalidInput(_)
                | Error::SingularMatrix { .. }
                | Error::Window { .. }
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(v: num_complex::Complex64, what: &str) -> Result<num_complex::Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} produced a non-finite value")))
    }
}
