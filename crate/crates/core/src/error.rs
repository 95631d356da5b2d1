use thiserror::Error;

/// Errors raised by the series, example, cascade and Monte Carlo routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series has coefficients through index {available}, index {requested} is missing")]
    InsufficientOrder { requested: usize, available: usize },

    #[error("series must hold at least one coefficient")]
    EmptySeries,

    #[error("root test needs at least {required} coefficients, got {available}")]
    TooFewCoefficients { required: usize, available: usize },

    #[error(
        "s = {s} lies outside the guarded evaluation radius {limit} (estimated radius {radius})"
    )]
    OutsideRadius { s: f64, limit: f64, radius: f64 },

    #[error("threshold undefined; any γ admissible (|A|_ω = 0)")]
    ThresholdUndefined,

    #[error("blow-up point: s = {s} is within {tolerance:e} of the pole at π/(2√2) = {horizon}")]
    BlowUp {
        s: f64,
        horizon: f64,
        tolerance: f64,
    },

    #[error("T = {horizon} beyond blow-up horizon π/(2√2) = {limit}")]
    BeyondBlowUp { horizon: f64, limit: f64 },

    #[error("T = {horizon} exceeds the admissible limit {limit}: {reason}")]
    HorizonTooLarge {
        horizon: f64,
        limit: f64,
        reason: &'static str,
    },

    #[error("explicit scheme unstable: dt = {dt:e} > h²/4 = {limit:e}")]
    Unstable { dt: f64, limit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
