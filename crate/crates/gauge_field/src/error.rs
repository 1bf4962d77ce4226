use abw_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("potential evaluated at flux center ({x1}, {x2})")]
    EvaluationAtCenter { x1: f64, x2: f64 },
    #[error("contour edge {edge} intersects obstacle {obstacle}")]
    ContourIntersectsObstacle { edge: usize, obstacle: String },
    #[error("segment passes through the flux center ({x1}, {x2})")]
    EdgeThroughFluxCenter { x1: f64, x2: f64 },
    #[error("basis contour {index} has winding vector {windings:?}, expected a unit vector")]
    BadBasis { index: usize, windings: Vec<i64> },
    #[error("unknown obstacle {0}")]
    UnknownObstacle(String),
    #[error("flux center ({x1}, {x2}) is not strictly inside an obstacle")]
    CenterOutsideObstacles { x1: f64, x2: f64 },
    #[error("line integral did not converge (error estimate {0:e})")]
    QuadratureNotConverged(f64),
    #[error(transparent)]
    Core(#[from] CoreError),
}
