use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("point ({x1}, {x2}) lies on the contour (distance {distance:e} below tolerance {tolerance:e})")]
    PointOnContour {
        x1: f64,
        x2: f64,
        distance: f64,
        tolerance: f64,
    },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
}
