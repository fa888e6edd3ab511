use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("basis is not closed: [X{i}, X{j}] leaves a residual of {residual:e}")]
    ClosureViolation { i: usize, j: usize, residual: f64 },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({steps}) exceeded at t = {t:e}")]
    MaxStepsExceeded { t: f64, steps: usize },

    #[error("Wei-Norman factorization is singular at t = {t:e}")]
    FactorizationSingularity { t: f64 },

    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("configuration parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("nothing to write: {0}")]
    EmptyResult(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the numerical engines rather than by input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::MaxStepsExceeded { .. }
                | Error::FactorizationSingularity { .. }
                | Error::ClosureViolation { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
