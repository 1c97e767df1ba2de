use thiserror::Error;

/// Errors raised by model construction, time stepping, and experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("mesh needs at least 8 cells, got {0}")]
    MeshTooCoarse(usize),

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("step size {dt:e} fell below dt_min = {dt_min:e} at t = {t}")]
    StepUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("Newton iteration failed to converge at t = {t} after {iters} iterations")]
    NewtonDiverged { t: f64, iters: usize },

    #[error("singular matrix (zero pivot in row {row})")]
    Singular { row: usize },

    #[error("singular Jacobian at continuation step {step} (parameter value {value})")]
    SingularAtStep { step: usize, value: f64 },

    #[error("bracket invalid: {0}")]
    InvalidBracket(String),

    #[error("probe at U = {u} diverged; check horizon or tolerances")]
    DivergedProbe { u: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit status: 1 for usage, configuration and input errors, 2
    /// for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::MeshTooCoarse(_)
            | Error::InvalidBracket(_)
            | Error::Config(_)
            | Error::Io(_) => 1,
            Error::NonFinite { .. }
            | Error::StepUnderflow { .. }
            | Error::NewtonDiverged { .. }
            | Error::Singular { .. }
            | Error::SingularAtStep { .. }
            | Error::DivergedProbe { .. }
            | Error::TooFewSamples { .. } => 2,
        }
    }
}
