use abw_core::{PhysicalConstants, Vec2};
use serde::{Deserialize, Serialize};

use crate::BeamError;

/// Beam launched from `base_point` along `direction`. The initial profile is
/// χ₀(τ/δ₁)·χ₀(s/(δ₂k)) times the carrier e^{i(mk/ħ)x·ω}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub base_point: Vec2,
    pub direction: Vec2,
    pub k: f64,
    pub delta1: f64,
    pub delta2: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

fn default_order() -> usize {
    2
}

impl BeamSpec {
    pub fn new(base_point: Vec2, direction: Vec2, k: f64, delta1: f64, delta2: f64, order: usize) -> Self {
        Self {
            base_point,
            direction,
            k,
            delta1,
            delta2,
            order,
            constants: PhysicalConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BeamError> {
        self.constants
            .validate()
            .map_err(|e| BeamError::InvalidSpec(e.to_string()))?;
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(BeamError::InvalidSpec(format!("k must be positive, got {}", self.k)));
        }
        if !(self.delta1 > 0.0 && self.delta2 > 0.0) {
            return Err(BeamError::InvalidSpec("delta1 and delta2 must be positive".into()));
        }
        if ((self.direction.norm()) - 1.0).abs() > 1e-9 {
            return Err(BeamError::InvalidSpec("direction must be a unit vector".into()));
        }
        if !self.base_point.is_finite() {
            return Err(BeamError::InvalidSpec("base point must be finite".into()));
        }
        Ok(())
    }

    /// Longitudinal half-width δ₂k of the initial profile.
    pub fn longitudinal_width(&self) -> f64 {
        self.delta2 * self.k
    }

    /// Carrier wavenumber mk/ħ.
    pub fn wavenumber(&self) -> f64 {
        self.constants.wavenumber(self.k)
    }

    /// Plain-scaling validity time k^{−δ₃}.
    pub fn validity_time(&self, delta3: f64) -> f64 {
        self.k.powf(-delta3)
    }
}

/// Length of the path along which the flux phase is collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PathExtent {
    /// From the initial position of the wave, distance kt behind x.
    #[default]
    Finite,
    /// From infinity.
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Method {
    Quadrature,
    #[default]
    StationaryPhase,
}

/// How the time argument of an evaluator is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TimeScaling {
    /// Physical time t.
    #[default]
    Plain,
    /// Rescaled time t′ with t = t′/k.
    ShortTime,
}

/// Grid used for the transported amplitude tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableResolution {
    /// Nodes across the strip 2δ₁ (plus margins).
    pub n_tau: usize,
    /// Upper bound on the longitudinal step.
    pub max_hs: f64,
}

impl Default for TableResolution {
    fn default() -> Self {
        Self {
            n_tau: 257,
            max_hs: f64::INFINITY,
        }
    }
}
