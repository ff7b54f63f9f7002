use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("m_s = {m_s} is not an upper level of any transition for spin {spin}")]
    LevelOutOfRange { m_s: f64, spin: f64 },

    #[error("non-thermal populations on transition m_s = {m_s}: population difference {difference:e} opposes the level ordering")]
    PopulationInversion { m_s: f64, difference: f64 },

    #[error("dispersion root polish failed: relative residual {residual:e} exceeds {tolerance:e}")]
    RootPolish { residual: f64, tolerance: f64 },

    #[error("analysis window [{low:e}, {high:e}] Hz contains fewer than three grid points")]
    EmptyWindow { low: f64, high: f64 },

    #[error("dataset has no uncensored rows")]
    AllCensored,

    #[error("dataset has {available} uncensored rows, at least {required} are needed")]
    InsufficientData { available: usize, required: usize },

    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("photon cutoff {cutoff} failed the convergence gate (relative shift {shift:e})")]
    TruncationNotConverged { cutoff: usize, shift: f64 },

    #[error("Hilbert space dimension {dimension} exceeds the cap of {cap}")]
    DimensionTooLarge { dimension: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
