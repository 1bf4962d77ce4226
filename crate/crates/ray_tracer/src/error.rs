use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayError {
    #[error("grazing incidence: |ω·n| = {0:e}")]
    GrazingIncidence(f64),
    #[error("ray still reflecting after {0} reflections")]
    TooManyReflections(usize),
    #[error("ray family develops a caustic between offsets {0} and {1}")]
    FamilyCaustic(f64, f64),
    #[error("ray family splits: offset {0} follows a different reflection sequence")]
    FamilySplits(f64),
    #[error("point ({x1}, {x2}) is outside the tube of leg {leg}")]
    OutsideTube { x1: f64, x2: f64, leg: usize },
    #[error("leg index {0} out of range (ray has {1} legs)")]
    BadLeg(usize, usize),
    #[error("start point lies inside obstacle {0}")]
    StartInsideObstacle(String),
    #[error("direction must be a unit vector, got length {0}")]
    NotUnit(f64),
}
