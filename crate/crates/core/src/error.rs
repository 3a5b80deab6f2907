use thiserror::Error;

/// Errors raised by the fat-slit library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("point lies on the boundary or at a cut endpoint: {0}")]
    OnBoundary(String),
    #[error("point lies inside the fat slit: {0}")]
    InsideSlit(String),
    #[error("newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Quadrature(_) | Error::NoConvergence { .. } => 3,
            Error::StepRejected(_) => 4,
            _ => 2,
        }
    }
}
