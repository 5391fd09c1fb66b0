use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("mean-violation: zero mode carries a nonzero coefficient ({0:e})")]
    MeanViolation(f64),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("step size {h} exceeds the advective limit {limit} (max |u| = {max_speed})")]
    StepTooLarge { h: f64, limit: f64, max_speed: f64 },

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("time {0} is off the noise grid")]
    OffGrid(f64),

    #[error("time {t} outside the noise path domain [{min}, {max}]")]
    OutOfDomain { t: f64, min: f64, max: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),

    #[error("config syntax error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("invalid config:\n  {}", .0.join("\n  "))]
    ConfigInvalid(Vec<String>),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
