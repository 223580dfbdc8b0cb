use thiserror::Error;

pub type Result<T> = std::result::Result<T, GbecError>;

#[derive(Debug, Error)]
pub enum GbecError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {msg} (achieved estimate {estimate:e})")]
    Numeric { msg: String, estimate: f64 },
    #[error("divergence at step {step}: {msg}")]
    Divergence { step: usize, msg: String },
    /// Attractive collapse; carries the last iterate that was still accepted.
    #[error("collapse at step {step}: width {width:.4} per particle")]
    Collapse { step: usize, width: f64, last: Vec<f64> },
    #[error("no squeezed mode: depleted number {0:e} too small")]
    NoSqueezedMode(f64),
    #[error("dynamical instability: {0}")]
    Instability(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

impl From<serde_json::Error> for GbecError {
    fn from(e: serde_json::Error) -> Self {
        GbecError::Format(e.to_string())
    }
}

impl From<csv::Error> for GbecError {
    fn from(e: csv::Error) -> Self {
        GbecError::Format(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(GbecError::Domain(msg.into()))
}
