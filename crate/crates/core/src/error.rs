use thiserror::Error;

use crate::impedance::FitReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Numeric,
    Config,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("thermal runaway at V = {voltage} V: {detail}")]
    ThermalRunaway { voltage: f64, detail: String },

    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    #[error("fit did not converge after {} iterations (best cost {:.3e})", .best.iterations, .best.cost)]
    FitNotConverged { best: Box<FitReport> },

    #[error("integration diverged at t = {time} s (|y| = {value})")]
    Instability { time: f64, value: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::Degenerate(_) => ErrorClass::Domain,
            Error::Config(_) => ErrorClass::Config,
            Error::Io(_) | Error::Data(_) => ErrorClass::Io,
            Error::ThermalRunaway { .. }
            | Error::NonConvergence { .. }
            | Error::FitNotConverged { .. }
            | Error::Instability { .. }
            | Error::Singular(_) => ErrorClass::Numeric,
        }
    }
}
