use abw_gauge::GaugeError;
use abw_rays::RayError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("invalid beam spec: {0}")]
    InvalidSpec(String),
    #[error("beam strip |τ| ≤ δ₁ intersects obstacle {0}")]
    StripIntersectsObstacle(String),
    #[error("Kannai integral did not settle: successive regularizations differ by {0:e}")]
    NonconvergentTail(f64),
    #[error("caustic in the ray family: {0}")]
    CausticError(String),
    #[error("transport source evaluated inside obstacle at ({x1}, {x2})")]
    SourceSingularity { x1: f64, x2: f64 },
    #[error("order {0} amplitudes need a spatially uniform scalar potential")]
    UnsupportedPotential(usize),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Ray(RayError),
}

impl From<RayError> for BeamError {
    fn from(e: RayError) -> Self {
        match e {
            RayError::FamilyCaustic(..) => BeamError::CausticError(e.to_string()),
            other => BeamError::Ray(other),
        }
    }
}
