use abw_core::{Domain, Shape, Vec2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::RayError;

/// |ω·n| below this aborts a trace.
pub const GRAZING_TOL: f64 = 1e-6;

/// Smooth surface piece that produced a reflection; the ray family is continued
/// off the same piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Reflector {
    Circle { center: Vec2, radius: f64 },
    /// Supporting line through `point` with the normal facing the incoming ray.
    Line { point: Vec2, normal: Vec2 },
}

impl Reflector {
    /// Parameter of the first forward intersection of x + sω, with its outward normal.
    pub fn intersect(&self, x: Vec2, omega: Vec2) -> Option<(f64, Vec2)> {
        match *self {
            Reflector::Circle { center, radius } => {
                let d = x - center;
                let b = d.dot(omega);
                // reflection is from outside only; a ray moving away from the center
                // (e.g. just reflected, start rounded onto the surface) has no hit
                if b >= 0.0 {
                    return None;
                }
                // perpendicular distance from the center to the line, computed directly
                let q = omega.cross(d).abs();
                if q > radius {
                    return None;
                }
                let half = ((radius - q) * (radius + q)).sqrt();
                let s = -b - half;
                if s <= 0.0 {
                    return None;
                }
                let p = x + omega * s;
                Some((s, (p - center).normalized()))
            }
            Reflector::Line { point, normal } => {
                let den = omega.dot(normal);
                if den >= 0.0 {
                    return None;
                }
                let s = (point - x).dot(normal) / den;
                (s > 0.0).then_some((s, normal))
            }
        }
    }
}

fn ser_end<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

fn de_end<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Leg x^(p) + (s − s_p)ω_p for s in [s_p, s_{p+1}].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub start: Vec2,
    pub direction: Vec2,
    pub s_start: f64,
    /// +∞ on an escaping last leg (serialized as null).
    #[serde(serialize_with = "ser_end", deserialize_with = "de_end")]
    pub s_end: f64,
    /// Surface hit at the end of the leg.
    #[serde(default)]
    pub reflector: Option<Reflector>,
    #[serde(default)]
    pub obstacle: Option<String>,
}

impl Leg {
    pub fn end(&self) -> Vec2 {
        self.start + self.direction * (self.s_end - self.s_start)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokenRay {
    pub legs: Vec<Leg>,
}

impl BrokenRay {
    pub fn reflections(&self) -> usize {
        self.legs.len() - 1
    }

    /// Index of the leg containing arc parameter s (clamped to the ends).
    pub fn leg_at(&self, s: f64) -> usize {
        self.legs
            .iter()
            .position(|l| s <= l.s_end)
            .unwrap_or(self.legs.len() - 1)
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        let l = &self.legs[self.leg_at(s)];
        l.start + l.direction * (s - l.s_start)
    }

    pub fn direction_at(&self, s: f64) -> Vec2 {
        self.legs[self.leg_at(s)].direction
    }

    /// Joint points x^(2), …, x^(r).
    pub fn joints(&self) -> Vec<Vec2> {
        self.legs.iter().skip(1).map(|l| l.start).collect()
    }

    pub fn reflector_sequence(&self) -> Vec<Option<String>> {
        self.legs.iter().map(|l| l.obstacle.clone()).collect()
    }
}

/// ω′ = ω − 2(ω·n)n.
pub fn reflect_direction(incoming: Vec2, normal: Vec2) -> Result<Vec2, RayError> {
    let c = incoming.dot(normal);
    if c.abs() < GRAZING_TOL {
        return Err(RayError::GrazingIncidence(c.abs()));
    }
    Ok((incoming - normal * (2.0 * c)).normalized())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub point: Vec2,
    pub normal: Vec2,
    pub s: f64,
    pub obstacle: usize,
    pub reflector: Reflector,
}

fn min_hit(best: &mut Option<(f64, Vec2, Reflector)>, cand: Option<(f64, Vec2)>, r: Reflector, min_s: f64) {
    if let Some((s, n)) = cand {
        if s > min_s && best.as_ref().is_none_or(|b| s < b.0) {
            *best = Some((s, n, r));
        }
    }
}

/// Front-facing hit of x + sω with a finite segment [a, b] offset along `normal`.
fn segment_hit(x: Vec2, omega: Vec2, a: Vec2, b: Vec2, normal: Vec2) -> Option<(f64, Vec2)> {
    let r = Reflector::Line { point: a, normal };
    let (s, n) = r.intersect(x, omega)?;
    let p = x + omega * s;
    let ab = b - a;
    let u = (p - a).dot(ab) / ab.norm_sq();
    (0.0..=1.0).contains(&u).then_some((s, n))
}

fn shape_hit(shape: &Shape, x: Vec2, omega: Vec2, min_s: f64) -> Option<(f64, Vec2, Reflector)> {
    let mut best = None;
    match shape {
        Shape::Disk { center, radius } => {
            let r = Reflector::Circle {
                center: *center,
                radius: *radius,
            };
            min_hit(&mut best, r.intersect(x, omega), r, min_s);
        }
        Shape::ConvexPolygon { vertices } => {
            let n = vertices.len();
            for k in 0..n {
                let (a, b) = (vertices[k], vertices[(k + 1) % n]);
                let nrm = -(b - a).perp().normalized();
                min_hit(
                    &mut best,
                    segment_hit(x, omega, a, b, nrm),
                    Reflector::Line { point: a, normal: nrm },
                    min_s,
                );
            }
        }
        Shape::Segment { a, b, thickness } => {
            let mut nrm = (*b - *a).perp().normalized();
            if omega.dot(nrm) > 0.0 {
                nrm = -nrm;
            }
            let off = nrm * (0.5 * thickness);
            let (a1, b1) = (*a + off, *b + off);
            min_hit(
                &mut best,
                segment_hit(x, omega, a1, b1, nrm),
                Reflector::Line { point: a1, normal: nrm },
                min_s,
            );
            if *thickness > 0.0 {
                for c in [*a, *b] {
                    let r = Reflector::Circle {
                        center: c,
                        radius: 0.5 * thickness,
                    };
                    min_hit(&mut best, r.intersect(x, omega), r, min_s);
                }
            }
        }
    }
    best
}

/// Nearest obstacle boundary hit along start + sω, s > 0.
pub fn first_hit(ray_start: Vec2, direction: Vec2, domain: &Domain) -> Option<Hit> {
    let scale = 1e-12 * (1.0 + ray_start.norm());
    let mut best: Option<Hit> = None;
    for (k, o) in domain.obstacles.iter().enumerate() {
        if let Some((s, n, r)) = shape_hit(&o.shape, ray_start, direction, scale) {
            if best.as_ref().is_none_or(|b| s < b.s) {
                best = Some(Hit {
                    point: ray_start + direction * s,
                    normal: n,
                    s,
                    obstacle: k,
                    reflector: r,
                });
            }
        }
    }
    best
}

fn check_unit(d: Vec2) -> Result<(), RayError> {
    if (d.norm() - 1.0).abs() > 1e-9 {
        return Err(RayError::NotUnit(d.norm()));
    }
    Ok(())
}

/// Follows first hits and specular reflections until the ray escapes.
pub fn trace_broken_ray(start: Vec2, direction: Vec2, domain: &Domain, max_reflections: usize) -> Result<BrokenRay, RayError> {
    check_unit(direction)?;
    if let Some(k) = domain.containing_obstacle(start) {
        return Err(RayError::StartInsideObstacle(domain.obstacles[k].id.clone()));
    }
    let mut legs = Vec::new();
    let (mut x, mut w, mut s0) = (start, direction, 0.0);
    loop {
        match first_hit(x, w, domain) {
            None => {
                legs.push(Leg {
                    start: x,
                    direction: w,
                    s_start: s0,
                    s_end: f64::INFINITY,
                    reflector: None,
                    obstacle: None,
                });
                return Ok(BrokenRay { legs });
            }
            Some(hit) => {
                if legs.len() == max_reflections {
                    return Err(RayError::TooManyReflections(max_reflections));
                }
                let w2 = reflect_direction(w, hit.normal)?;
                legs.push(Leg {
                    start: x,
                    direction: w,
                    s_start: s0,
                    s_end: s0 + hit.s,
                    reflector: Some(hit.reflector),
                    obstacle: Some(domain.obstacles[hit.obstacle].id.clone()),
                });
                x = hit.point;
                w = w2;
                s0 += hit.s;
            }
        }
    }
}

/// Traces from `start` reflecting off the given surfaces in order (continuations
/// of the central ray's surfaces); `None` if a surface is missed.
pub fn trace_along(start: Vec2, direction: Vec2, reflectors: &[Reflector]) -> Result<Option<BrokenRay>, RayError> {
    let mut legs = Vec::with_capacity(reflectors.len() + 1);
    let (mut x, mut w, mut s0) = (start, direction, 0.0);
    for r in reflectors {
        let Some((s, n)) = r.intersect(x, w) else {
            return Ok(None);
        };
        let w2 = reflect_direction(w, n)?;
        legs.push(Leg {
            start: x,
            direction: w,
            s_start: s0,
            s_end: s0 + s,
            reflector: Some(*r),
            obstacle: None,
        });
        x += w * s;
        w = w2;
        s0 += s;
    }
    legs.push(Leg {
        start: x,
        direction: w,
        s_start: s0,
        s_end: f64::INFINITY,
        reflector: None,
        obstacle: None,
    });
    Ok(Some(BrokenRay { legs }))
}

/// Rays from base + η ω⊥ for each offset η, all with direction ω. Errors if the
/// family splits between reflection sequences or the endpoint map at arc length
/// `arc_length` folds.
pub fn ray_family(
    base: Vec2,
    direction: Vec2,
    domain: &Domain,
    offsets: &[f64],
    arc_length: f64,
    max_reflections: usize,
) -> Result<Vec<BrokenRay>, RayError> {
    let perp = direction.perp();
    let rays = offsets
        .iter()
        .map(|&o| trace_broken_ray(base + perp * o, direction, domain, max_reflections))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(first) = rays.first() {
        let seq = first.reflector_sequence();
        for (r, &o) in rays.iter().zip(offsets) {
            if r.reflector_sequence() != seq {
                return Err(RayError::FamilySplits(o));
            }
        }
    }
    let mut sign = 0.0;
    for k in 1..rays.len() {
        let d = offsets[k] - offsets[k - 1];
        if d == 0.0 {
            continue;
        }
        let p0 = rays[k - 1].point_at(arc_length);
        let p1 = rays[k].point_at(arc_length);
        let w = rays[k].direction_at(arc_length);
        let jac = w.cross(p1 - p0) / d;
        if jac == 0.0 || (sign != 0.0 && jac.signum() != sign) {
            return Err(RayError::FamilyCaustic(offsets[k - 1], offsets[k]));
        }
        sign = jac.signum();
    }
    Ok(rays)
}
