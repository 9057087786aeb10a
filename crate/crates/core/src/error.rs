use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The electron came closer to the Coulomb centre than the guard radius.
    #[error("MinRadiusViolation: |r| = {radius:e} below guard {guard:e} at t = {t}")]
    MinRadiusViolation { t: f64, radius: f64, guard: f64 },

    #[error("StepBudgetExceeded: run needs {required} steps, budget is {budget}")]
    StepBudgetExceeded { required: u64, budget: u64 },

    #[error("ZeroRadius: position vector has zero length")]
    ZeroRadius,

    #[error("UnboundOrbit: energy {energy} is not negative")]
    UnboundOrbit { energy: f64 },

    #[error("DegenerateApsis: |A| = {magnitude:e}, apsis direction undefined")]
    DegenerateApsis { magnitude: f64 },

    #[error("ZeroVector: {0}")]
    ZeroVector(&'static str),

    #[error("ZeroAngularMomentum: orbit plane undefined")]
    ZeroAngularMomentum,

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("OpenLoop: loop does not close (theta mismatch {theta_gap:e}, phi mismatch {phi_gap:e})")]
    OpenLoop { theta_gap: f64, phi_gap: f64 },

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("EmptyResult: no records to write")]
    EmptyResult,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Short machine-readable name used in the sweep CSV `error_code` column.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MinRadiusViolation { .. } => "MinRadiusViolation",
            Error::StepBudgetExceeded { .. } => "StepBudgetExceeded",
            Error::ZeroRadius => "ZeroRadius",
            Error::UnboundOrbit { .. } => "UnboundOrbit",
            Error::DegenerateApsis { .. } => "DegenerateApsis",
            Error::ZeroVector(_) => "ZeroVector",
            Error::ZeroAngularMomentum => "ZeroAngularMomentum",
            Error::Domain(_) => "DomainError",
            Error::OpenLoop { .. } => "OpenLoop",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::EmptyResult => "EmptyResult",
            Error::Io { .. } => "Io",
            Error::Csv { .. } => "Csv",
        }
    }

    /// Usage/config problems as opposed to failures while integrating.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::InvalidConfig(_) | Error::OpenLoop { .. } | Error::EmptyResult
        )
    }
}
