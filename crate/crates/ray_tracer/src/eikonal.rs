use abw_core::Vec2;

use crate::trace::trace_along;
use crate::{BrokenRay, RayError, Reflector};

/// Phase ψ_p of the family of rays leaving the line x^(1) + ηω₁⊥ with direction ω₁,
/// evaluated near leg p: ψ_p(x) = y(η)·ω₁ + arc length from y(η) to x along the
/// member of the family whose leg p passes through x.
#[derive(Debug, Clone, PartialEq)]
pub struct EikonalPhase {
    pub leg_index: usize,
    pub base: Vec2,
    pub direction: Vec2,
    pub reflectors: Vec<Reflector>,
    /// Surface that ends leg p, if any.
    pub next: Option<Reflector>,
    pub tube_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EikonalSample {
    pub value: f64,
    /// ω_p of the ray through x.
    pub gradient: Vec2,
    /// Offset η of the ray's starting point along ω₁⊥.
    pub offset: f64,
    /// Transverse spreading dτ/dη with the orientation flip of each reflection
    /// removed; 1 on the first leg, positive away from caustics.
    pub jacobian: f64,
    /// Arc length from the starting point to x.
    pub arc: f64,
    /// Start point y(η).
    pub start: Vec2,
    /// Distance along leg p from its first point to x.
    pub leg_arc: f64,
    /// Length of leg p for this member of the family (∞ on the last leg, or if
    /// the member misses the next surface).
    pub leg_length: f64,
}

/// Eikonal phase of `leg` (0-based) built from the surfaces the ray reflects off.
pub fn eikonal_phase(ray: &BrokenRay, leg: usize, tube_radius: f64) -> Result<EikonalPhase, RayError> {
    if leg >= ray.legs.len() {
        return Err(RayError::BadLeg(leg, ray.legs.len()));
    }
    let reflectors = ray.legs[..leg]
        .iter()
        .map(|l| l.reflector.ok_or(RayError::BadLeg(leg, ray.legs.len())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EikonalPhase {
        leg_index: leg,
        base: ray.legs[0].start,
        direction: ray.legs[0].direction,
        reflectors,
        next: ray.legs[leg].reflector,
        tube_radius,
    })
}

impl EikonalPhase {
    fn leg_of(&self, eta: f64) -> Result<Option<(Vec2, Vec2, f64)>, RayError> {
        let y = self.base + self.direction.perp() * eta;
        Ok(trace_along(y, self.direction, &self.reflectors)?.map(|r| {
            let l = &r.legs[self.leg_index];
            (l.start, l.direction, l.s_start)
        }))
    }

    fn leg_length(&self, xp: Vec2, w: Vec2) -> f64 {
        self.next
            .and_then(|r| r.intersect(xp, w))
            .map_or(f64::INFINITY, |(s, _)| s)
    }

    /// Start point and reflection points of the family member with offset η, up to
    /// the first point of leg p.
    pub fn joints(&self, eta: f64) -> Result<Option<Vec<Vec2>>, RayError> {
        let y = self.base + self.direction.perp() * eta;
        Ok(trace_along(y, self.direction, &self.reflectors)?
            .map(|r| r.legs.iter().map(|l| l.start).collect()))
    }

    fn outside(&self, x: Vec2) -> RayError {
        RayError::OutsideTube {
            x1: x.x1,
            x2: x.x2,
            leg: self.leg_index,
        }
    }

    pub fn evaluate(&self, x: Vec2) -> Result<EikonalSample, RayError> {
        let perp = self.direction.perp();
        if self.leg_index == 0 {
            let eta = (x - self.base).dot(perp);
            if eta.abs() > self.tube_radius {
                return Err(self.outside(x));
            }
            let y = self.base + perp * eta;
            let arc = (x - y).dot(self.direction);
            return Ok(EikonalSample {
                value: x.dot(self.direction),
                gradient: self.direction,
                offset: eta,
                jacobian: 1.0,
                arc,
                start: y,
                leg_arc: arc,
                leg_length: self.leg_length(y, self.direction),
            });
        }
        let resid = |eta: f64| -> Result<Option<f64>, RayError> {
            Ok(self.leg_of(eta)?.map(|(xp, w, _)| w.cross(x - xp)))
        };
        let h = 1e-6 * self.tube_radius.max(1e-3);
        let mut eta = 0.0;
        let mut converged = false;
        for _ in 0..60 {
            let (Some(f), Some(fp), Some(fm)) = (resid(eta)?, resid(eta + h)?, resid(eta - h)?) else {
                return Err(self.outside(x));
            };
            let df = (fp - fm) / (2.0 * h);
            if df == 0.0 || !df.is_finite() {
                return Err(self.outside(x));
            }
            let step = f / df;
            let step = step.clamp(-0.5 * self.tube_radius, 0.5 * self.tube_radius);
            eta -= step;
            if eta.abs() > 1.5 * self.tube_radius {
                return Err(self.outside(x));
            }
            if step.abs() < 1e-14 * (1.0 + self.tube_radius) {
                converged = true;
                break;
            }
        }
        if !converged || eta.abs() > self.tube_radius {
            return Err(self.outside(x));
        }
        let (xp, w, sp) = self.leg_of(eta)?.ok_or_else(|| self.outside(x))?;
        let sigma = (x - xp).dot(w);
        // J = cross(ω_p, ∂x/∂η) at fixed σ
        let (Some((xa, wa, _)), Some((xb, wb, _))) = (self.leg_of(eta + h)?, self.leg_of(eta - h)?) else {
            return Err(self.outside(x));
        };
        let dx = ((xa + wa * sigma) - (xb + wb * sigma)) / (2.0 * h);
        let sign = if self.leg_index % 2 == 0 { 1.0 } else { -1.0 };
        let jacobian = sign * w.cross(dx);
        if jacobian <= 0.0 {
            return Err(RayError::FamilyCaustic(eta, eta));
        }
        let y = self.base + perp * eta;
        let arc = sp + sigma;
        Ok(EikonalSample {
            value: y.dot(self.direction) + arc,
            gradient: w,
            offset: eta,
            jacobian,
            arc,
            start: y,
            leg_arc: sigma,
            leg_length: self.leg_length(xp, w),
        })
    }
}
