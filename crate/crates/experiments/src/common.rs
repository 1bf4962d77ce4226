//! Probe sampling, loop fluxes and the interference law shared by the experiments.

use std::f64::consts::PI;

use abw_core::{winding_number, Contour, Vec2};
use abw_gauge::GaugeField;

use crate::ExperimentError;

/// Center plus `rings` concentric rings of 6i points each.
pub fn probe_points(center: Vec2, radius: f64, rings: usize) -> Vec<Vec2> {
    let mut pts = vec![center];
    if radius <= 0.0 {
        return pts;
    }
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        let n = 6 * i;
        for j in 0..n {
            pts.push(center + Vec2::from_angle(2.0 * PI * j as f64 / n as f64) * r);
        }
    }
    pts
}

/// Σ flux_j · winding(loop, center_j).
pub fn loop_flux(field: &GaugeField, polygon: Vec<Vec2>) -> Result<f64, ExperimentError> {
    let contour = Contour::new(polygon)?;
    let mut total = 0.0;
    for term in &field.flux_terms {
        let w = winding_number(&contour, term.center)?;
        total += term.flux * w as f64;
    }
    Ok(total)
}

/// Representative of ±α modulo 2π in [0, π].
pub fn reduce_alpha(alpha: f64) -> f64 {
    let r = alpha.rem_euclid(2.0 * PI);
    if r > PI {
        2.0 * PI - r
    } else {
        r
    }
}

/// Same fluxes reduced into (−π, π], smooth gauge phases dropped: a fixed member of
/// the gauge class used for gauge-independent error bounds.
pub fn reference_field(field: &GaugeField) -> GaugeField {
    let mut f = field.clone();
    f.smooth_phases.clear();
    for t in &mut f.flux_terms {
        let r = t.flux.rem_euclid(2.0 * PI);
        t.flux = if r > PI { r - 2.0 * PI } else { r };
    }
    f
}

/// 4 sin²(α/2).
pub fn predicted_peak(alpha: f64) -> f64 {
    4.0 * (0.5 * alpha).sin().powi(2)
}

/// 2 arcsin(√m / 2), with m clamped to [0, 4].
pub fn estimate_alpha(measured: f64) -> f64 {
    2.0 * (measured.clamp(0.0, 4.0).sqrt() / 2.0).asin()
}

/// Phase x reduced into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}
