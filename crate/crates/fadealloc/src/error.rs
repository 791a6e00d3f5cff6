//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constellation error: {0}")]
    Constellation(String),

    #[error("special function domain error: {0}")]
    SpecialDomain(String),

    #[error("special function did not converge: {0}")]
    SpecialConvergence(String),

    #[error("rate {rate} bits is not achievable (input supports at most {max_info} bits)")]
    UnachievableRate { rate: f64, max_info: f64 },

    #[error("rate {rate} exceeds the tabulated range of the curve (grid tops out at {grid_max} bits); rebuild with a larger SNR grid")]
    RateBeyondGrid { rate: f64, grid_max: f64 },

    #[error("MMSE target {0} must be positive")]
    MmseTargetNonpositive(f64),

    #[error("rate {rate} exceeds the truncated-scheme ceiling {max_rate} bits (beta too small)")]
    InfeasibleTruncation { rate: f64, max_rate: f64 },

    #[error("allocation infeasible: {0}")]
    Infeasible(String),

    #[error("root bracketing failed for {context}: searched [{lo}, {hi}]")]
    BracketFailure { context: String, lo: f64, hi: f64 },

    #[error("quadrature did not reach the requested tolerance in {context}: achieved {achieved}, wanted {wanted}")]
    QuadratureNonConvergence {
        context: String,
        achieved: f64,
        wanted: f64,
    },

    #[error("power-axis ranges do not overlap: need {needed_db} dB inside [{lo_db}, {hi_db}] dB")]
    RangeMismatch {
        needed_db: f64,
        lo_db: f64,
        hi_db: f64,
    },

    #[error("not enough reliable points for the slope fit: {0} available, need at least 4")]
    TooFewPoints(usize),

    #[error("curve cache entry is invalid: {0}")]
    InvalidCache(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error stems from bad user input rather than a numerical
    /// failure. The CLI maps the former to exit code 2, the latter to 3.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Constellation(_)
                | Error::Config(_)
                | Error::UnachievableRate { .. }
        )
    }
}
