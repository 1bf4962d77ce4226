use abw_beam::BeamError;
use abw_core::CoreError;
use abw_gauge::GaugeError;
use abw_rays::RayError;
use abw_solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("error budget {bound:.3e} exceeds the tolerance {tolerance:.3e}")]
    ErrorBudgetExceeded { bound: f64, tolerance: f64 },
    #[error("no broken path found: {0}")]
    NoPathFound(String),
    #[error("initial data degenerate: component {component} holds {fraction:.3e} of the norm")]
    InitialDataDegenerate { component: String, fraction: f64 },
    #[error("modulus vanishes on {fraction:.3} of the evaluation set")]
    VanishingModulus { fraction: f64 },
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Beam(#[from] BeamError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl From<RayError> for ExperimentError {
    fn from(e: RayError) -> Self {
        ExperimentError::Beam(e.into())
    }
}

impl ExperimentError {
    /// True for failures of the numerics (as opposed to a malformed setup).
    pub fn is_numerical(&self) -> bool {
        match self {
            ExperimentError::DegenerateGeometry(_) | ExperimentError::InvalidSpec(_) => false,
            ExperimentError::Core(_) => false,
            ExperimentError::Solver(SolverError::InvalidConfig(_)) => false,
            ExperimentError::Beam(BeamError::InvalidSpec(_) | BeamError::StripIntersectsObstacle(_)) => false,
            ExperimentError::Gauge(g) => matches!(g, GaugeError::QuadratureNotConverged(_)),
            _ => true,
        }
    }
}
