use abw_core::Vec2;
use serde::{Deserialize, Serialize};

use crate::BrokenRay;

/// Ray-centred coordinates s = (x − x⁰)·ω − t, τ = (x − x⁰)·ω⊥.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayFrame {
    pub base_point: Vec2,
    pub direction: Vec2,
    pub normal: Vec2,
}

impl RayFrame {
    pub fn new(base_point: Vec2, direction: Vec2) -> Self {
        let direction = direction.normalized();
        Self {
            base_point,
            direction,
            normal: direction.perp(),
        }
    }

    /// (s, τ) of the spacetime point (x, t).
    pub fn coordinates(&self, x: Vec2, t: f64) -> (f64, f64) {
        let d = x - self.base_point;
        (d.dot(self.direction) - t, d.dot(self.normal))
    }

    /// x⁰ + sω + τω⊥ (the spatial point at t = 0).
    pub fn point(&self, s: f64, tau: f64) -> Vec2 {
        self.base_point + self.direction * s + self.normal * tau
    }
}

/// A broken ray lifted to spacetime with t = s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeRay {
    pub ray: BrokenRay,
}

impl SpacetimeRay {
    pub fn new(ray: BrokenRay) -> Self {
        Self { ray }
    }

    /// Times at which the lifted ray meets an obstacle.
    pub fn hit_times(&self) -> Vec<f64> {
        self.ray.legs.iter().skip(1).map(|l| l.s_start).collect()
    }

    /// (x(t), t).
    pub fn at(&self, t: f64) -> (Vec2, f64) {
        (self.ray.point_at(t), t)
    }
}
