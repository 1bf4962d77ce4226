//! Closed polylines and winding numbers.

use serde::{Deserialize, Serialize};

use crate::vec2::{point_segment_distance, signed_angle};
use crate::{CoreError, Vec2};

/// Closed polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contour {
    pub points: Vec<Vec2>,
}

impl Contour {
    pub fn new(points: Vec<Vec2>) -> Result<Self, CoreError> {
        if points.len() < 3 {
            return Err(CoreError::InvalidGeometry(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(CoreError::InvalidGeometry("non-finite contour point".into()));
        }
        Ok(Self { points })
    }

    /// Regular n-gon inscribed in the circle, counterclockwise, starting at angle 0.
    pub fn circle(center: Vec2, radius: f64, n: usize) -> Self {
        let n = n.max(3);
        let points = (0..n)
            .map(|k| center + Vec2::from_angle(2.0 * std::f64::consts::PI * k as f64 / n as f64) * radius)
            .collect();
        Self { points }
    }

    /// Axis-aligned rectangle, counterclockwise.
    pub fn rectangle(lo: Vec2, hi: Vec2) -> Self {
        Self {
            points: vec![lo, Vec2::new(hi.x1, lo.x2), hi, Vec2::new(lo.x1, hi.x2)],
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.points.len();
        (0..n).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// Inserts the midpoint of every edge.
    pub fn refined(&self) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len());
        for (a, b) in self.edges() {
            points.push(a);
            points.push(a.lerp(b, 0.5));
        }
        Self { points }
    }

    /// Concatenation of two closed traversals.
    pub fn traversed_twice(&self) -> Self {
        let mut points = self.points.clone();
        points.extend_from_slice(&self.points);
        Self { points }
    }

    pub fn bounding_diagonal(&self) -> f64 {
        let (mut lo, mut hi) = (self.points[0], self.points[0]);
        for p in &self.points {
            lo = Vec2::new(lo.x1.min(p.x1), lo.x2.min(p.x2));
            hi = Vec2::new(hi.x1.max(p.x1), hi.x2.max(p.x2));
        }
        lo.distance(hi)
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b).0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn length(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }
}

/// Signed number of counterclockwise turns of `contour` around `point`.
pub fn winding_number(contour: &Contour, point: Vec2) -> Result<i64, CoreError> {
    let tolerance = 1e-12 * contour.bounding_diagonal();
    let distance = contour.distance_to(point);
    if distance < tolerance || distance == 0.0 {
        return Err(CoreError::PointOnContour {
            x1: point.x1,
            x2: point.x2,
            distance,
            tolerance,
        });
    }
    let total: f64 = contour
        .edges()
        .map(|(a, b)| signed_angle(a - point, b - point))
        .sum();
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_examples() {
        let c = Contour::circle(Vec2::ZERO, 1.0, 64);
        assert_eq!(winding_number(&c, Vec2::ZERO).unwrap(), 1);
        assert_eq!(winding_number(&c, Vec2::new(5.0, 0.0)).unwrap(), 0);
        assert_eq!(winding_number(&c.traversed_twice(), Vec2::ZERO).unwrap(), 2);
    }

    #[test]
    fn reversal_and_refinement() {
        let c = Contour::circle(Vec2::new(1.0, 2.0), 0.5, 17);
        let p = Vec2::new(1.1, 2.05);
        assert_eq!(winding_number(&c.reversed(), p).unwrap(), -1);
        assert_eq!(winding_number(&c.refined().refined(), p).unwrap(), 1);
    }

    #[test]
    fn point_on_contour_rejected() {
        let c = Contour::rectangle(Vec2::ZERO, Vec2::new(1.0, 1.0));
        assert!(matches!(
            winding_number(&c, Vec2::new(0.5, 0.0)),
            Err(CoreError::PointOnContour { .. })
        ));
    }

    #[test]
    fn too_few_points() {
        assert!(Contour::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]).is_err());
    }
}
