use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use abw_core::{mollifier_derivative, mollifier_eval, Complex64, Vec2};
use serde::{Deserialize, Serialize};

use crate::{GaugeError, GaugeField};

/// amplitude · χ₀(|x − center| / radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn value(&self, x: Vec2) -> f64 {
        self.amplitude * mollifier_eval(x.distance(self.center) / self.radius)
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let d = x - self.center;
        let r = d.norm();
        if r == 0.0 {
            return Vec2::ZERO;
        }
        d * (self.amplitude * mollifier_derivative(r / self.radius) / (self.radius * r))
    }
}

pub type PhaseFn = Arc<dyn Fn(Vec2) -> (f64, Vec2) + Send + Sync>;

/// Real phase φ (units of action) entering g = e^{iφ/ħ}.
#[derive(Clone)]
pub enum SmoothPhase {
    Bumps(Vec<Bump>),
    /// Returns (φ(x), ∇φ(x)).
    Custom(PhaseFn),
}

impl Default for SmoothPhase {
    fn default() -> Self {
        SmoothPhase::Bumps(Vec::new())
    }
}

impl fmt::Debug for SmoothPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothPhase::Bumps(b) => f.debug_tuple("Bumps").field(b).finish(),
            SmoothPhase::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl SmoothPhase {
    pub fn value(&self, x: Vec2) -> f64 {
        match self {
            SmoothPhase::Bumps(b) => b.iter().map(|b| b.value(x)).sum(),
            SmoothPhase::Custom(f) => f(x).0,
        }
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        match self {
            SmoothPhase::Bumps(b) => b.iter().fold(Vec2::ZERO, |s, b| s + b.gradient(x)),
            SmoothPhase::Custom(f) => f(x).1,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, SmoothPhase::Bumps(b) if b.iter().all(|b| b.amplitude == 0.0))
    }
}

/// g(x) = exp(i Σ_j p_j θ_j(x) + i φ(x)/ħ), θ_j the polar angle about the flux
/// center of obstacle j.
#[derive(Debug, Clone, Default)]
pub struct GaugeTransform {
    pub windings: BTreeMap<String, i64>,
    pub smooth_phase: SmoothPhase,
}

impl GaugeTransform {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn winding(obstacle: &str, p: i64) -> Self {
        Self {
            windings: BTreeMap::from([(obstacle.to_owned(), p)]),
            smooth_phase: SmoothPhase::default(),
        }
    }

    pub fn smooth(phase: SmoothPhase) -> Self {
        Self {
            windings: BTreeMap::new(),
            smooth_phase: phase,
        }
    }

    fn center_for(field: &GaugeField, id: &str) -> Result<Vec2, GaugeError> {
        field
            .flux_terms
            .iter()
            .find(|t| t.obstacle.as_deref() == Some(id))
            .map(|t| t.center)
            .ok_or_else(|| GaugeError::UnknownObstacle(id.to_owned()))
    }

    /// Φ(x) = Σ p_j θ_j(x) + φ(x)/ħ (one branch of the angle).
    pub fn phase_at(&self, field: &GaugeField, x: Vec2) -> Result<f64, GaugeError> {
        let mut phase = self.smooth_phase.value(x) / field.constants.hbar;
        for (id, &p) in &self.windings {
            if p != 0 {
                let c = Self::center_for(field, id)?;
                phase += p as f64 * (x - c).angle();
            }
        }
        Ok(phase)
    }

    /// ∇Φ(x).
    pub fn phase_gradient(&self, field: &GaugeField, x: Vec2) -> Result<Vec2, GaugeError> {
        let mut grad = self.smooth_phase.gradient(x) / field.constants.hbar;
        for (id, &p) in &self.windings {
            if p != 0 {
                let r = x - Self::center_for(field, id)?;
                grad += r.perp() * (p as f64 / r.norm_sq());
            }
        }
        Ok(grad)
    }

    /// g(x).
    pub fn factor(&self, field: &GaugeField, x: Vec2) -> Result<Complex64, GaugeError> {
        Ok(Complex64::from_polar(1.0, self.phase_at(field, x)?))
    }
}

/// A′ = A + (ħc/e)∇Φ: windings shift the vortex fluxes by 2πp, the smooth phase
/// adds a gradient term.
pub fn apply_gauge(field: &GaugeField, g: &GaugeTransform) -> Result<GaugeField, GaugeError> {
    let mut out = field.clone();
    for (id, &p) in &g.windings {
        if p == 0 {
            continue;
        }
        let term = out
            .flux_terms
            .iter_mut()
            .find(|t| t.obstacle.as_deref() == Some(id.as_str()))
            .ok_or_else(|| GaugeError::UnknownObstacle(id.clone()))?;
        term.flux += 2.0 * std::f64::consts::PI * p as f64;
    }
    if !g.smooth_phase.is_trivial() {
        out.smooth_phases.push(g.smooth_phase.clone());
    }
    Ok(out)
}
