use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operation not supported for {0} bodies")]
    UnsupportedKind(&'static str),
    #[error("quadrature did not converge (achieved error {achieved:.3e}, target {target:.3e})")]
    Quadrature { achieved: f64, target: f64 },
    #[error("cell is unbounded after {extensions} extensions (truncation reached {reached})")]
    UnboundedCell { extensions: u32, reached: f64 },
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
