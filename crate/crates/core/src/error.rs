use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The frequency sits on a band edge, where the Green's function and
    /// the mode density diverge.
    #[error("frequency {omega} lies on the band edge {edge} (singular)")]
    BandEdgeSingularity { omega: f64, edge: f64 },

    #[error("grading factor xi^{exponent} is outside the floating-point range")]
    GradingOverflow { exponent: i64 },

    #[error("dense operation requested for n = {n}, above the limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("resolvent is numerically singular (condition estimate {condition:e})")]
    NearSingular { condition: f64 },

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    QuadratureFailure { estimate: f64, tol: f64 },

    #[error("time window {window} is shorter than the damping time 1/epsilon = {decay}; the response aliases")]
    Aliasing { window: f64, decay: f64 },

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("{check}: deviation {deviation:e} exceeds tolerance {tol:e}")]
    VerificationFailed {
        check: &'static str,
        deviation: f64,
        tol: f64,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ChainError>;

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ChainError::InvalidParameter {
            field,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ChainError::InvalidParameter {
            field,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}
