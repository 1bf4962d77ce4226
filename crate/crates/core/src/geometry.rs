//! Obstacles, domains and signed distances.

use serde::{Deserialize, Serialize};

use crate::vec2::point_segment_distance;
use crate::{CoreError, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Shape {
    Disk { center: Vec2, radius: f64 },
    /// Counterclockwise, strictly convex.
    ConvexPolygon { vertices: Vec<Vec2> },
    /// Thickness 0 is an ideal mirror.
    Segment { a: Vec2, b: Vec2, thickness: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: String,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub obstacles: Vec<Obstacle>,
    pub bounding_box: (Vec2, Vec2),
}

impl Shape {
    pub fn validate(&self) -> Result<(), CoreError> {
        match self {
            Shape::Disk { center, radius } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(CoreError::InvalidGeometry(format!(
                        "disk needs finite center and positive radius, got {radius}"
                    )));
                }
            }
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                if n < 3 || vertices.iter().any(|v| !v.is_finite()) {
                    return Err(CoreError::InvalidGeometry(
                        "polygon needs at least 3 finite vertices".into(),
                    ));
                }
                for k in 0..n {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    let c = vertices[(k + 2) % n];
                    if (b - a).cross(c - b) <= 0.0 {
                        return Err(CoreError::InvalidGeometry(format!(
                            "polygon is not strictly convex and counterclockwise at vertex {}",
                            (k + 1) % n
                        )));
                    }
                }
                let turn: f64 = (0..n)
                    .map(|k| {
                        let a = vertices[k];
                        let b = vertices[(k + 1) % n];
                        let c = vertices[(k + 2) % n];
                        crate::vec2::signed_angle(b - a, c - b)
                    })
                    .sum();
                if (turn - 2.0 * std::f64::consts::PI).abs() > 1e-9 {
                    return Err(CoreError::InvalidGeometry("polygon is self-intersecting".into()));
                }
            }
            Shape::Segment { a, b, thickness } => {
                if !a.is_finite() || !b.is_finite() || a == b {
                    return Err(CoreError::InvalidGeometry("degenerate segment".into()));
                }
                if !(thickness.is_finite() && *thickness >= 0.0) {
                    return Err(CoreError::InvalidGeometry(format!(
                        "segment thickness must be >= 0, got {thickness}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Negative inside, zero on the boundary.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Shape::Disk { center, radius } => p.distance(*center) - radius,
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut dist = f64::INFINITY;
                let mut inside = true;
                for k in 0..n {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    dist = dist.min(point_segment_distance(p, a, b).0);
                    if (b - a).cross(p - a) < 0.0 {
                        inside = false;
                    }
                }
                if inside {
                    -dist
                } else {
                    dist
                }
            }
            Shape::Segment { a, b, thickness } => point_segment_distance(p, *a, *b).0 - 0.5 * thickness,
        }
    }

    /// Unit outward normal at (or near) a boundary point; the gradient of the signed distance.
    pub fn outward_normal(&self, p: Vec2) -> Vec2 {
        match self {
            Shape::Disk { center, .. } => (p - *center).normalized(),
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, Vec2::ZERO);
                for k in 0..n {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    let (d, _) = point_segment_distance(p, a, b);
                    if d < best.0 {
                        best = (d, -(b - a).perp().normalized());
                    }
                }
                best.1
            }
            Shape::Segment { a, b, .. } => {
                let (d, q) = point_segment_distance(p, *a, *b);
                if d > 0.0 {
                    (p - q) / d
                } else {
                    (*b - *a).perp().normalized()
                }
            }
        }
    }

    /// Axis-aligned bounding box of the closed shape.
    pub fn extent(&self) -> (Vec2, Vec2) {
        match self {
            Shape::Disk { center, radius } => (
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
            ),
            Shape::ConvexPolygon { vertices } => bbox(vertices.iter().copied(), 0.0),
            Shape::Segment { a, b, thickness } => bbox([*a, *b].into_iter(), 0.5 * thickness),
        }
    }

    /// Points on the boundary, used for disjointness checks.
    pub fn boundary_samples(&self, n: usize) -> Vec<Vec2> {
        match self {
            Shape::Disk { center, radius } => (0..n)
                .map(|k| *center + Vec2::from_angle(2.0 * std::f64::consts::PI * k as f64 / n as f64) * *radius)
                .collect(),
            Shape::ConvexPolygon { vertices } => {
                let m = vertices.len();
                let per = (n / m).max(2);
                let mut out = Vec::with_capacity(per * m);
                for k in 0..m {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % m];
                    out.extend((0..per).map(|i| a.lerp(b, i as f64 / per as f64)));
                }
                out
            }
            Shape::Segment { a, b, thickness } => {
                let nrm = (*b - *a).perp().normalized() * (0.5 * thickness);
                let per = (n / 2).max(2);
                let mut out = Vec::with_capacity(2 * per + 2);
                for i in 0..=per {
                    let q = a.lerp(*b, i as f64 / per as f64);
                    out.push(q + nrm);
                    out.push(q - nrm);
                }
                out
            }
        }
    }

    /// A point of the closed shape (center of a disk, centroid otherwise).
    pub fn representative_point(&self) -> Vec2 {
        match self {
            Shape::Disk { center, .. } => *center,
            Shape::ConvexPolygon { vertices } => {
                vertices.iter().fold(Vec2::ZERO, |s, v| s + *v) / vertices.len() as f64
            }
            Shape::Segment { a, b, .. } => a.lerp(*b, 0.5),
        }
    }
}

fn bbox(points: impl Iterator<Item = Vec2>, pad: f64) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Vec2::new(lo.x1.min(p.x1), lo.x2.min(p.x2));
        hi = Vec2::new(hi.x1.max(p.x1), hi.x2.max(p.x2));
    }
    (lo - Vec2::new(pad, pad), hi + Vec2::new(pad, pad))
}

impl Obstacle {
    pub fn new(id: impl Into<String>, shape: Shape) -> Result<Self, CoreError> {
        shape.validate()?;
        Ok(Self { id: id.into(), shape })
    }

    pub fn disk(id: impl Into<String>, center: Vec2, radius: f64) -> Result<Self, CoreError> {
        Self::new(id, Shape::Disk { center, radius })
    }

    pub fn segment(id: impl Into<String>, a: Vec2, b: Vec2, thickness: f64) -> Result<Self, CoreError> {
        Self::new(id, Shape::Segment { a, b, thickness })
    }

    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.shape.signed_distance(p)
    }
}

impl Domain {
    pub fn new(obstacles: Vec<Obstacle>, bounding_box: (Vec2, Vec2)) -> Result<Self, CoreError> {
        let d = Self {
            obstacles,
            bounding_box,
        };
        d.validate()?;
        Ok(d)
    }

    /// Domain without obstacles.
    pub fn empty(bounding_box: (Vec2, Vec2)) -> Self {
        Self {
            obstacles: Vec::new(),
            bounding_box,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let (lo, hi) = self.bounding_box;
        if !(lo.is_finite() && hi.is_finite() && lo.x1 < hi.x1 && lo.x2 < hi.x2) {
            return Err(CoreError::InvalidGeometry("bounding box must satisfy lo < hi".into()));
        }
        for (k, o) in self.obstacles.iter().enumerate() {
            o.shape.validate()?;
            if self.obstacles[..k].iter().any(|p| p.id == o.id) {
                return Err(CoreError::InvalidGeometry(format!("duplicate obstacle id {}", o.id)));
            }
            let (elo, ehi) = o.shape.extent();
            if !(elo.x1 > lo.x1 && elo.x2 > lo.x2 && ehi.x1 < hi.x1 && ehi.x2 < hi.x2) {
                return Err(CoreError::InvalidGeometry(format!(
                    "obstacle {} is not strictly inside the bounding box",
                    o.id
                )));
            }
        }
        for j in 0..self.obstacles.len() {
            for k in j + 1..self.obstacles.len() {
                if !closures_disjoint(&self.obstacles[j].shape, &self.obstacles[k].shape) {
                    return Err(CoreError::InvalidGeometry(format!(
                        "obstacles {} and {} have intersecting closures",
                        self.obstacles[j].id, self.obstacles[k].id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.obstacles.iter().position(|o| o.id == id)
    }

    /// Index of the obstacle whose interior contains `p`.
    pub fn containing_obstacle(&self, p: Vec2) -> Option<usize> {
        self.obstacles.iter().position(|o| o.signed_distance(p) < 0.0)
    }

    pub fn in_bounding_box(&self, p: Vec2) -> bool {
        let (lo, hi) = self.bounding_box;
        p.x1 > lo.x1 && p.x1 < hi.x1 && p.x2 > lo.x2 && p.x2 < hi.x2
    }
}

fn closures_disjoint(a: &Shape, b: &Shape) -> bool {
    if let (Shape::Disk { center: c1, radius: r1 }, Shape::Disk { center: c2, radius: r2 }) = (a, b) {
        return c1.distance(*c2) > r1 + r2;
    }
    let n = 512;
    if b.signed_distance(a.representative_point()) <= 0.0 || a.signed_distance(b.representative_point()) <= 0.0 {
        return false;
    }
    a.boundary_samples(n).iter().all(|p| b.signed_distance(*p) > 0.0)
        && b.boundary_samples(n).iter().all(|p| a.signed_distance(*p) > 0.0)
}

/// Distance from `point` to the nearest obstacle boundary; negative inside an obstacle.
/// Without obstacles the result is +∞.
pub fn signed_distance(domain: &Domain, point: Vec2) -> f64 {
    domain
        .obstacles
        .iter()
        .map(|o| o.signed_distance(point))
        .fold(f64::INFINITY, f64::min)
}
