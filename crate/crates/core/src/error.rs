use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is well formed but violates the precondition of the
    /// requested operation (divergent integral, failed cancellation, ...).
    #[error("rejected: {0}")]
    Rejected(String),

    #[error("assumption check failed: {0}")]
    AssumptionFailed(String),

    #[error("multiplier is not Hermitian at frequency {frequency:?} (defect {defect:.3e})")]
    NonHermitian { frequency: Vec<i64>, defect: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn measure(msg: impl Into<String>) -> Self {
        Error::InvalidMeasure(msg.into())
    }

    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::Rejected(msg.into())
    }
}
