use thiserror::Error;

/// Errors raised by the catalog, exact formulas, and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("gamma_{index} must be positive")]
    NonPositiveGamma { index: usize },

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(String),

    #[error("point outside the domain (gauge norm {norm})")]
    OutsideDomain { norm: f64 },

    #[error("lambda = {lambda} is not above the threshold {threshold}: the weighted space degenerates")]
    BelowThreshold { lambda: f64, threshold: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("monomial norm diverges at lambda = {lambda} (shell ratios {ratios:?})")]
    DivergentNorm { lambda: f64, ratios: Vec<f64> },

    #[error("gram factorization failed: matrix is not positive definite")]
    FactorizationFailed,

    #[error("gram matrix is not hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("reproducing kernel vanishes ({0:e})")]
    VanishingKernel(f64),

    #[error("diastasis has imaginary part {0:e}: analytic continuation is inconsistent")]
    NonRealDiastasis(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no divergence bracket found: {0}")]
    NoBracket(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures where the mathematics said no (divergence, degenerate
    /// spaces, failed numerics), as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BelowThreshold { .. }
                | Error::DivergentNorm { .. }
                | Error::FactorizationFailed
                | Error::NotHermitian(_)
                | Error::VanishingKernel(_)
                | Error::NonRealDiastasis(_)
                | Error::NoBracket(_)
                | Error::Quadrature(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
