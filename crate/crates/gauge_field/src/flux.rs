use std::collections::BTreeMap;

use abw_core::quadrature::adaptive_gk;
use abw_core::vec2::point_segment_distance;
use abw_core::{signed_distance, winding_number, Contour, Domain, Shape, Vec2};
use serde::{Deserialize, Serialize};

use crate::{GaugeError, GaugeField};

/// |flux difference mod 2π| below this counts as gauge equivalent.
pub const GAUGE_EQUIVALENCE_TOL: f64 = 1e-6;

const EDGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FluxReport {
    pub contour: Contour,
    /// (e/ħc)∮A·dx.
    pub flux: f64,
    pub per_obstacle: BTreeMap<String, i64>,
    /// (I₁N, I₂N, I₃N) when produced by [`flux_decomposition`].
    pub partial_integrals: Option<(f64, f64, f64)>,
    pub error_estimate: f64,
}

/// Serialized form of a flux report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxRecord {
    pub contour_id: String,
    pub flux: f64,
    pub windings: BTreeMap<String, i64>,
}

impl FluxReport {
    pub fn record(&self, contour_id: impl Into<String>) -> FluxRecord {
        FluxRecord {
            contour_id: contour_id.into(),
            flux: self.flux,
            windings: self.per_obstacle.clone(),
        }
    }
}

/// Minimum of a convex function on [0, 1] by golden-section search.
fn convex_min(f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(0.0)).min(f(1.0))
}

fn edge_clearance(shape: &Shape, a: Vec2, b: Vec2) -> f64 {
    match shape {
        Shape::Disk { center, radius } => point_segment_distance(*center, a, b).0 - radius,
        _ => convex_min(|s| shape.signed_distance(a.lerp(b, s))),
    }
}

fn windings(domain: &Domain, contour: &Contour) -> Result<BTreeMap<String, i64>, GaugeError> {
    domain
        .obstacles
        .iter()
        .map(|o| Ok((o.id.clone(), winding_number(contour, o.shape.representative_point())?)))
        .collect()
}

/// (e/ħc)∫ A·dx along a → b by adaptive Gauss–Kronrod.
fn edge_integral(field: &GaugeField, a: Vec2, b: Vec2) -> Result<(f64, f64), GaugeError> {
    for t in &field.flux_terms {
        if t.flux != 0.0 && point_segment_distance(t.center, a, b).0 == 0.0 {
            return Err(GaugeError::EdgeThroughFluxCenter {
                x1: t.center.x1,
                x2: t.center.x2,
            });
        }
    }
    let d = b - a;
    let coupling = field.constants.flux_coupling();
    let r = adaptive_gk(
        |s| {
            field
                .vector_potential(a + d * s)
                .map(|v| v.dot(d))
                .unwrap_or(f64::NAN)
        },
        0.0,
        1.0,
        EDGE_TOL / coupling,
        20_000,
    );
    if !r.converged || !r.value.is_finite() {
        return Err(GaugeError::QuadratureNotConverged(r.error));
    }
    Ok((coupling * r.value, coupling * r.error))
}

/// Flux through `contour`, with per-obstacle winding numbers.
pub fn line_integral_flux(field: &GaugeField, contour: &Contour, domain: &Domain) -> Result<FluxReport, GaugeError> {
    for (k, (a, b)) in contour.edges().enumerate() {
        for o in &domain.obstacles {
            if edge_clearance(&o.shape, a, b) <= 0.0 {
                return Err(GaugeError::ContourIntersectsObstacle {
                    edge: k,
                    obstacle: o.id.clone(),
                });
            }
        }
    }
    let mut flux = 0.0;
    let mut err = 0.0;
    for (a, b) in contour.edges() {
        let (v, e) = edge_integral(field, a, b)?;
        flux += v;
        err += e;
    }
    Ok(FluxReport {
        contour: contour.clone(),
        flux,
        per_obstacle: windings(domain, contour)?,
        partial_integrals: None,
        error_estimate: err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxDecomposition {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl FluxDecomposition {
    /// −I₁N + I₂N + I₃N: the flux through the triangle x⁰, x⁰ − Nω, x⁰ − Nθ.
    pub fn combined(&self) -> f64 {
        -self.i1 + self.i2 + self.i3
    }
}

/// I₁N = (e/ħc)∫₀ᴺ ω·A(x⁰ − sω)ds, I₂N the same along θ, and I₃N the integral
/// over the closing segment x⁰ − Nω → x⁰ − Nθ.
pub fn flux_decomposition(
    field: &GaugeField,
    x0: Vec2,
    omega: Vec2,
    theta: Vec2,
    n: f64,
) -> Result<FluxReport, GaugeError> {
    let p1 = x0 - omega * n;
    let p2 = x0 - theta * n;
    let (i1, e1) = edge_integral(field, p1, x0)?;
    let (i2, e2) = edge_integral(field, p2, x0)?;
    let (i3, e3) = edge_integral(field, p1, p2)?;
    let contour = Contour::new(vec![x0, p1, p2])?;
    Ok(FluxReport {
        flux: -i1 + i2 + i3,
        contour,
        per_obstacle: BTreeMap::new(),
        partial_integrals: Some((i1, i2, i3)),
        error_estimate: e1 + e2 + e3,
    })
}

/// True iff every basis flux agrees modulo 2π.
pub fn is_gauge_equivalent(
    f1: &GaugeField,
    f2: &GaugeField,
    basis: &[Contour],
    domain: &Domain,
) -> Result<bool, GaugeError> {
    let mut equivalent = true;
    for (index, c) in basis.iter().enumerate() {
        let w = windings(domain, c)?;
        let vals: Vec<i64> = w.values().copied().collect();
        let ones = vals.iter().filter(|&&v| v == 1).count();
        if ones != 1 || vals.iter().any(|&v| v != 0 && v != 1) {
            return Err(GaugeError::BadBasis { index, windings: vals });
        }
        let d = line_integral_flux(f1, c, domain)?.flux - line_integral_flux(f2, c, domain)?.flux;
        let two_pi = 2.0 * std::f64::consts::PI;
        let r = d - two_pi * (d / two_pi).round();
        if r.abs() >= GAUGE_EQUIVALENCE_TOL {
            equivalent = false;
        }
    }
    Ok(equivalent)
}

/// max |∂₁A₂ − ∂₂A₁| over `points`, central differences with the given step.
pub fn curl_residual_at(field: &GaugeField, points: &[Vec2], step: f64) -> Result<f64, GaugeError> {
    let mut worst: f64 = 0.0;
    let (ex, ey) = (Vec2::new(step, 0.0), Vec2::new(0.0, step));
    for &p in points {
        let d1a2 = (field.vector_potential(p + ex)?.x2 - field.vector_potential(p - ex)?.x2) / (2.0 * step);
        let d2a1 = (field.vector_potential(p + ey)?.x1 - field.vector_potential(p - ey)?.x1) / (2.0 * step);
        worst = worst.max((d1a2 - d2a1).abs());
    }
    Ok(worst)
}

/// Curl residual on a lattice of about `samples` points of the bounding box,
/// skipping points within 10⁻³ of an obstacle.
pub fn curl_residual(field: &GaugeField, domain: &Domain, samples: usize) -> Result<f64, GaugeError> {
    let step = 1e-4;
    let n = (samples.max(1) as f64).sqrt().ceil() as usize;
    let (lo, hi) = domain.bounding_box;
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = Vec2::new(
                lo.x1 + (hi.x1 - lo.x1) * (i as f64 + 0.5) / n as f64,
                lo.x2 + (hi.x2 - lo.x2) * (j as f64 + 0.5) / n as f64,
            );
            if signed_distance(domain, p) > 1e-3 {
                pts.push(p);
            }
        }
    }
    curl_residual_at(field, &pts, step)
}
