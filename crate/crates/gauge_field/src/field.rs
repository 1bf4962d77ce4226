use std::fmt;
use std::sync::Arc;

use abw_core::vec2::{point_segment_distance, signed_angle};
use abw_core::{Domain, PhysicalConstants, Vec2};
use serde::{Deserialize, Serialize};

use crate::transform::SmoothPhase;
use crate::GaugeError;

/// Canonical vortex: A = (flux·ħc/e)/(2π) · (−(x₂−c₂), x₁−c₁)/|x−c|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxTerm {
    pub center: Vec2,
    /// Dimensionless flux (e/ħc)∮A·dx.
    pub flux: f64,
    /// Obstacle that contains the center, when known.
    #[serde(default)]
    pub obstacle: Option<String>,
}

pub type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Vec2, f64) -> f64 + Send + Sync>;

#[derive(Clone, Default)]
pub enum ScalarPotential {
    #[default]
    Zero,
    Uniform(f64),
    Custom(ScalarFn),
}

impl ScalarPotential {
    pub fn eval(&self, x: Vec2, t: f64) -> f64 {
        match self {
            ScalarPotential::Zero => 0.0,
            ScalarPotential::Uniform(v) => *v,
            ScalarPotential::Custom(f) => f(x, t),
        }
    }

    /// The constant value, if the potential is uniform in space and time.
    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            ScalarPotential::Zero => Some(0.0),
            ScalarPotential::Uniform(v) => Some(*v),
            ScalarPotential::Custom(_) => None,
        }
    }
}

impl fmt::Debug for ScalarPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarPotential::Zero => write!(f, "Zero"),
            ScalarPotential::Uniform(v) => write!(f, "Uniform({v})"),
            ScalarPotential::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A(x) = Σ vortex terms + (c/e)Σ∇φ + custom curl-free terms, together with V(x, t).
#[derive(Clone, Default)]
pub struct GaugeField {
    pub constants: PhysicalConstants,
    pub flux_terms: Vec<FluxTerm>,
    /// Gradient terms (c/e)∇φ from smooth gauge phases.
    pub smooth_phases: Vec<SmoothPhase>,
    /// Extra compactly supported, curl-free terms given directly as A.
    pub custom_terms: Vec<VectorFn>,
    pub scalar_potential: ScalarPotential,
}

impl fmt::Debug for GaugeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeField")
            .field("constants", &self.constants)
            .field("flux_terms", &self.flux_terms)
            .field("smooth_phases", &self.smooth_phases.len())
            .field("custom_terms", &self.custom_terms.len())
            .field("scalar_potential", &self.scalar_potential)
            .finish()
    }
}

/// Single-vortex field of the given flux centered at `center`.
pub fn canonical_flux_potential(center: Vec2, flux: f64, constants: PhysicalConstants) -> GaugeField {
    GaugeField {
        constants,
        flux_terms: vec![FluxTerm {
            center,
            flux,
            obstacle: None,
        }],
        ..Default::default()
    }
}

impl GaugeField {
    pub fn new(constants: PhysicalConstants) -> Self {
        Self {
            constants,
            ..Default::default()
        }
    }

    pub fn with_flux(mut self, obstacle: Option<&str>, center: Vec2, flux: f64) -> Self {
        self.flux_terms.push(FluxTerm {
            center,
            flux,
            obstacle: obstacle.map(str::to_owned),
        });
        self
    }

    pub fn with_scalar(mut self, v: ScalarPotential) -> Self {
        self.scalar_potential = v;
        self
    }

    /// Checks every flux center lies strictly inside an obstacle, labelling unlabelled terms.
    pub fn attach_to(&mut self, domain: &Domain) -> Result<(), GaugeError> {
        for term in &mut self.flux_terms {
            match domain.containing_obstacle(term.center) {
                Some(k) => {
                    let id = &domain.obstacles[k].id;
                    match &term.obstacle {
                        Some(label) if label != id => {
                            return Err(GaugeError::CenterOutsideObstacles {
                                x1: term.center.x1,
                                x2: term.center.x2,
                            })
                        }
                        _ => term.obstacle = Some(id.clone()),
                    }
                }
                None => {
                    return Err(GaugeError::CenterOutsideObstacles {
                        x1: term.center.x1,
                        x2: term.center.x2,
                    })
                }
            }
        }
        Ok(())
    }

    /// Total flux attributed to the obstacle `id`.
    pub fn flux_of(&self, id: &str) -> f64 {
        self.flux_terms
            .iter()
            .filter(|t| t.obstacle.as_deref() == Some(id))
            .map(|t| t.flux)
            .sum()
    }

    pub fn total_flux(&self) -> f64 {
        self.flux_terms.iter().map(|t| t.flux).sum()
    }

    fn vortex(&self, term: &FluxTerm, x: Vec2) -> Result<Vec2, GaugeError> {
        let d = x - term.center;
        let r2 = d.norm_sq();
        if r2 == 0.0 {
            return Err(GaugeError::EvaluationAtCenter {
                x1: x.x1,
                x2: x.x2,
            });
        }
        let scale = term.flux * self.constants.flux_quantum_scale() / (2.0 * std::f64::consts::PI);
        Ok(d.perp() * (scale / r2))
    }

    /// A(x).
    pub fn vector_potential(&self, x: Vec2) -> Result<Vec2, GaugeError> {
        let mut a = Vec2::ZERO;
        for term in &self.flux_terms {
            if term.flux != 0.0 {
                a += self.vortex(term, x)?;
            }
        }
        let coef = self.constants.light_speed / self.constants.charge;
        for p in &self.smooth_phases {
            a += p.gradient(x) * coef;
        }
        for f in &self.custom_terms {
            a += f(x);
        }
        Ok(a)
    }

    /// V(x, t).
    pub fn scalar(&self, x: Vec2, t: f64) -> f64 {
        self.scalar_potential.eval(x, t)
    }

    /// (e/ħc)∫ A·dx along the straight segment a → b, in closed form where possible.
    pub fn segment_phase(&self, a: Vec2, b: Vec2) -> Result<f64, GaugeError> {
        let mut phase = 0.0;
        for term in &self.flux_terms {
            if term.flux == 0.0 {
                continue;
            }
            let (da, db) = (a - term.center, b - term.center);
            let (dist, _) = point_segment_distance(term.center, a, b);
            if dist == 0.0 || da.norm_sq() == 0.0 || db.norm_sq() == 0.0 {
                return Err(GaugeError::EdgeThroughFluxCenter {
                    x1: term.center.x1,
                    x2: term.center.x2,
                });
            }
            phase += term.flux / (2.0 * std::f64::consts::PI) * signed_angle(da, db);
        }
        for p in &self.smooth_phases {
            phase += (p.value(b) - p.value(a)) / self.constants.hbar;
        }
        if !self.custom_terms.is_empty() {
            let coupling = self.constants.flux_coupling();
            let d = b - a;
            let r = abw_core::quadrature::adaptive_gk(
                |s| {
                    let x = a + d * s;
                    self.custom_terms.iter().map(|f| f(x).dot(d)).sum::<f64>()
                },
                0.0,
                1.0,
                1e-12,
                4096,
            );
            phase += coupling * r.value;
        }
        Ok(phase)
    }

    /// (e/ħc)∫₀^∞ ω·A(x − sω) ds, the phase picked up along the ray arriving at x
    /// from infinity with direction ω.
    pub fn ray_phase_from_infinity(&self, x: Vec2, omega: Vec2) -> Result<f64, GaugeError> {
        let mut phase = 0.0;
        for term in &self.flux_terms {
            if term.flux == 0.0 {
                continue;
            }
            let d = x - term.center;
            if d.norm_sq() == 0.0 || (d.cross(omega) == 0.0 && d.dot(omega) > 0.0) {
                return Err(GaugeError::EdgeThroughFluxCenter {
                    x1: term.center.x1,
                    x2: term.center.x2,
                });
            }
            phase += term.flux / (2.0 * std::f64::consts::PI) * signed_angle(-omega, d);
        }
        for p in &self.smooth_phases {
            phase += p.value(x) / self.constants.hbar;
        }
        if !self.custom_terms.is_empty() {
            let coupling = self.constants.flux_coupling();
            // substitution s = u/(1−u) maps [0, ∞) to [0, 1)
            let r = abw_core::quadrature::adaptive_gk(
                |u| {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let s = u / (1.0 - u);
                    let y = x - omega * s;
                    let j = 1.0 / ((1.0 - u) * (1.0 - u));
                    self.custom_terms.iter().map(|f| f(y).dot(omega)).sum::<f64>() * j
                },
                0.0,
                1.0,
                1e-12,
                4096,
            );
            phase += coupling * r.value;
        }
        Ok(phase)
    }
}
