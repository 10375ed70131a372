use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input or configuration.
    Config,
    /// A well-defined physical condition (no threshold, dark mode, ...).
    Domain,
    /// Numerical failure (non-convergence, singular systems).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("no threshold in range: pump-only state stable up to {p_max:.6e} W")]
    NoThreshold { p_max: f64 },

    #[error("no convergence after {iterations} Newton iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("converged to unstable gauge: reference sideband {mode} is dark")]
    GaugeInactive { mode: i32 },

    #[error("unstable state: max non-Goldstone growth rate {growth:.3e} rad/s")]
    UnstableState { growth: f64 },

    #[error("dark mode {mode}: output flux {flux:.3e} photons/s below the detection floor")]
    DarkMode { mode: i32, flux: f64 },

    #[error("analysis frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("dimension overflow: Fock space dimension {dim} exceeds limit {limit}")]
    DimensionOverflow { dim: u128, limit: usize },

    #[error("trivial space: every mode cutoff is zero")]
    TrivialSpace,

    #[error("matrix exponential did not converge: {0}")]
    ExpmNoConvergence(String),

    #[error("target spectrum is not positive semidefinite at {freq_hz:.6e} Hz (min eigenvalue {min_eig:.3e})")]
    NotPsd { freq_hz: f64, min_eig: f64 },

    #[error("invalid trace data: {0}")]
    Trace(String),

    #[error("zero DC level on channel {0}")]
    ZeroDc(String),

    #[error("need at least {needed} calibration levels, got {got}")]
    TooFewLevels { needed: usize, got: usize },

    #[error("calibration for detector {detector} rejected: {reason}")]
    CalibrationRejected { detector: String, reason: String },

    #[error("missing calibration for detector {0}")]
    MissingCalibration(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParam { .. }
            | Error::Config { .. }
            | Error::TrivialSpace
            | Error::NonPositiveFrequency(_)
            | Error::Trace(_)
            | Error::TooFewLevels { .. }
            | Error::MissingCalibration(_)
            | Error::Io(_) => ErrorClass::Config,
            Error::NoThreshold { .. }
            | Error::DarkMode { .. }
            | Error::UnstableState { .. }
            | Error::GaugeInactive { .. }
            | Error::DimensionOverflow { .. }
            | Error::ZeroDc(_)
            | Error::NotPsd { .. }
            | Error::CalibrationRejected { .. } => ErrorClass::Domain,
            Error::NoConvergence { .. } | Error::Singular(_) | Error::ExpmNoConvergence(_) => {
                ErrorClass::Numerical
            }
        }
    }
}
