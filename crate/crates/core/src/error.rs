use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Truncated-oscillator operator failed its unitarity check.
    #[error("Fock-space truncation too small (unitarity defect {defect:.3e} at dim {dim})")]
    Truncation { defect: f64, dim: usize },

    /// Signal and noise definitions collapsed (zero combined noise).
    #[error("degenerate noise: combined projection noise is zero")]
    DegenerateNoise,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scheduling error: {0}")]
    Schedule(String),

    /// Least-squares solver hit a singular normal-equations system.
    #[error("singular linear system in fit")]
    SingularFit,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
