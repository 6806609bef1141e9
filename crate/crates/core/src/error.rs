use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spin: 2S = {0} (need 2S >= 1)")]
    InvalidSpin(u32),

    #[error("m = {m} is not on the ladder of S = {s}")]
    OffLadder { m: String, s: String },

    #[error("{0} is not a half-integer")]
    NotHalfInteger(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent drive: {0}")]
    InconsistentDrive(String),

    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}")]
    NormDrift { drift: f64, t: f64, limit: f64 },

    #[error("no reversal minimum found: {0}")]
    PeriodNotFound(String),

    #[error("series length mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
}

impl Error {
    /// True for failures of the numerical integration itself rather than of the inputs.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::NoConvergence | Error::NormDrift { .. } | Error::PeriodNotFound(_))
    }
}
