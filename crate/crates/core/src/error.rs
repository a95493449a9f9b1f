use thiserror::Error;

/// Errors raised by the library. Each variant maps to a stable CLI exit code
/// (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("standing assumption violated: {0}")]
    Assumption(String),

    /// s = t/2 and the input law is the single atom `atom`: the Brown measure is a
    /// semicircle of variance t/2 on the vertical line through `atom`.
    #[error("degenerate parameters: law is a point mass at {atom} and s = t/2 = {half_t}")]
    Degenerate { atom: f64, half_t: f64 },

    #[error("eigensolver failed on trial {trial}: {message}")]
    Eigensolver { trial: usize, message: String },

    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Validation(_)
            | Error::Domain(_)
            | Error::Assumption(_)
            | Error::ParamMismatch(_) => 2,
            Error::Convergence(_) | Error::Eigensolver { .. } => 3,
            Error::Io(_) => 4,
            // The CLI handles the degenerate case itself; reaching here means a
            // library caller surfaced it unhandled.
            Error::Degenerate { .. } => 2,
        }
    }
}
