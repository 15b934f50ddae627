use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the field, force, dynamics, phase and pattern routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A field was requested at the source point or on a current sheet.
    #[error("singular field evaluation: {0}")]
    Singularity(String),

    /// Inputs outside the regime where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of refinements before meeting its tolerance.
    #[error("quadrature did not converge: {what} (estimated error {estimate:e}, requested {requested:e})")]
    Quadrature {
        what: String,
        estimate: f64,
        requested: f64,
    },

    /// The adaptive integrator shrank its step below representable resolution.
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    /// The particle-solenoid coupling is too strong for the impulse comparison.
    #[error("coupling too strong for impulse comparison: kappa = {kappa:e} (limit {limit:e})")]
    Coupling { kappa: f64, limit: f64 },

    /// Configuration or scenario parameter rejected.
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

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

pub type Result<T> = std::result::Result<T, Error>;
