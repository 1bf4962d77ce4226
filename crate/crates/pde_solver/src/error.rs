use abw_core::CoreError;
use abw_gauge::GaugeError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("linear solve stalled after {iterations} iterations at residual {residual:e}")]
    LinearSolveFailure { iterations: usize, residual: f64 },
    #[error("mask projection removed {fraction:e} of the norm at t = {time}")]
    NormLossExceeded { fraction: f64, time: f64 },
    #[error("grid edge passes within 1e-6 of the flux center at ({x1}, {x2})")]
    EdgeThroughFluxCenter { x1: f64, x2: f64 },
    #[error("state grid or mask does not match the solver grid")]
    MaskMismatch,
    #[error("bad snapshot time {0}")]
    BadSnapshotTime(f64),
    #[error("malformed grid dump: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}
