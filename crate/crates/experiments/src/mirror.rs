//! Two-mirror interferometer: a beam split at P₀ reaches P₁ along two once-reflected
//! paths enclosing a flux-carrying obstacle.

use abw_beam::{BeamSolution, BeamSpec, BrokenBeam, BrokenSample};
use abw_core::{Complex64, Domain, Obstacle, Shape, Vec2};
use abw_gauge::GaugeField;

use crate::common::{estimate_alpha, loop_flux, predicted_peak, probe_points, reduce_alpha};
use crate::magnetic::{InterferenceReport, Oracle};
use crate::oracle::{pde_probe_values, PdeOracle};
use crate::ExperimentError;

#[derive(Debug, Clone)]
pub struct MirrorSpec {
    pub p0: Vec2,
    pub p1: Vec2,
    /// Two segment obstacles.
    pub mirrors: (Obstacle, Obstacle),
    pub obstacle: Obstacle,
    pub field: GaugeField,
    pub k: f64,
    pub delta1: f64,
    /// Longitudinal half-width δ₂k of the initial profile.
    pub longitudinal_width: f64,
    pub probe_radius: f64,
    pub probe_rings: usize,
    pub bounding_box: (Vec2, Vec2),
    pub floor: f64,
    pub pde: Option<PdeOracle>,
}

impl MirrorSpec {
    pub fn domain(&self) -> Result<Domain, ExperimentError> {
        Ok(Domain::new(
            vec![self.mirrors.0.clone(), self.mirrors.1.clone(), self.obstacle.clone()],
            self.bounding_box,
        )?)
    }
}

/// Launch direction from p0 that reflects off the front face of `mirror` into p1
/// (image method).
fn launch_direction(p0: Vec2, p1: Vec2, mirror: &Obstacle) -> Result<Vec2, ExperimentError> {
    let Shape::Segment { a, b, thickness } = mirror.shape else {
        return Err(ExperimentError::InvalidSpec(format!("mirror {} must be a segment", mirror.id)));
    };
    let mut n = (b - a).perp().normalized();
    if (p0 - a).dot(n) < 0.0 {
        n = -n;
    }
    if (p1 - a).dot(n) <= 0.0 {
        return Err(ExperimentError::NoPathFound(format!("P₀ and P₁ lie on opposite sides of mirror {}", mirror.id)));
    }
    let face = a + n * (0.5 * thickness);
    let image = p1 - n * (2.0 * (p1 - face).dot(n));
    let d = image - p0;
    if d.norm() < 1e-12 {
        return Err(ExperimentError::NoPathFound("P₀ coincides with the image of P₁".into()));
    }
    Ok(d.normalized())
}

struct Arm {
    beam: BrokenBeam,
    sample: BrokenSample,
    length: f64,
}

fn build_arm(spec: &MirrorSpec, domain: &Domain, mirror: &Obstacle) -> Result<Arm, ExperimentError> {
    let dir = launch_direction(spec.p0, spec.p1, mirror)?;
    let bspec = BeamSpec::new(spec.p0, dir, spec.k, spec.delta1, spec.longitudinal_width / spec.k, 0);
    let beam = BrokenBeam::new(bspec, spec.field.clone(), domain, 4, None)?;
    let legs = &beam.ray().legs;
    let hits_mirror = legs.len() >= 2 && legs[0].obstacle.as_deref() == Some(mirror.id.as_str());
    let last = &legs[1.min(legs.len() - 1)];
    let r = spec.p1 - last.start;
    let miss = r.cross(last.direction).abs();
    if !hits_mirror || miss > 1e-6 || r.dot(last.direction) <= 0.0 {
        return Err(ExperimentError::NoPathFound(format!("the ray via {} does not reach P₁", mirror.id)));
    }
    let length = legs[0].s_end + r.dot(last.direction);
    let sample = beam
        .samples(spec.p1, length)?
        .into_iter()
        .find(|s| s.leg == 1)
        .ok_or_else(|| ExperimentError::NoPathFound(format!("reflected leg via {} misses P₁", mirror.id)))?;
    Ok(Arm { beam, sample, length })
}

/// Interference of the two arms at P₁. The second arm is rescaled to the first arm's
/// |c₀| and the peak is reported divided by |2c₀|².
pub fn mirror_interferometer(spec: &MirrorSpec, oracle: Oracle) -> Result<InterferenceReport, ExperimentError> {
    if !(spec.k > 0.0 && spec.delta1 > 0.0 && spec.longitudinal_width > 0.0 && spec.probe_radius >= 0.0) {
        return Err(ExperimentError::InvalidSpec("k, δ₁ and the longitudinal width must be positive".into()));
    }
    let domain = spec.domain()?;
    let a1 = build_arm(spec, &domain, &spec.mirrors.0)?;
    let a2 = build_arm(spec, &domain, &spec.mirrors.1)?;
    let (c1, c2) = (a1.sample.c0.norm(), a2.sample.c0.norm());
    if c1 < 1e-8 || c2 < 1e-8 {
        return Err(ExperimentError::DegenerateGeometry("|c₀| vanishes at P₁".into()));
    }
    let travel = 0.5 * (a1.length + a2.length);
    let t = travel / spec.k;
    let h1 = a1.beam.ray().legs[1].start;
    let h2 = a2.beam.ray().legs[1].start;
    let alpha = reduce_alpha(loop_flux(&spec.field, vec![spec.p0, h1, spec.p1, h2])?);
    let probes = probe_points(spec.p1, spec.probe_radius, spec.probe_rings);
    let scale = 2.0 * c1;
    let ratio = c1 / c2;
    let mut beam_peak = None;
    if oracle != Oracle::PdeSolver {
        let (s1, s2) = (BeamSolution::broken(a1.beam.clone()), BeamSolution::broken(a2.beam.clone()));
        let mut best: f64 = 0.0;
        for &x in &probes {
            let u = s1.evaluate(x, travel)?;
            let v = s2.evaluate(x, travel)? * ratio;
            best = best.max((u - v).norm_sqr());
        }
        beam_peak = Some(best / (scale * scale));
    }
    let mut pde_peak = None;
    if oracle != Oracle::Beam {
        let pde = spec
            .pde
            .as_ref()
            .ok_or_else(|| ExperimentError::InvalidSpec("the PDE oracle needs a `pde` box".into()))?;
        let cfg = pde.config(spec.k, spec.field.constants, spec.p1)?;
        let init = |x: Vec2| -> Result<Complex64, ExperimentError> {
            Ok(a1.beam.initial_data(x)? - a2.beam.initial_data(x)? * ratio)
        };
        let vals = pde_probe_values(&domain, &spec.field, &cfg, &init, t, &probes)?;
        pde_peak = Some(vals.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max) / (scale * scale));
    }
    let measured = beam_peak.or(pde_peak).unwrap_or(0.0);
    let predicted = predicted_peak(alpha);
    let (first, second) = match oracle {
        Oracle::Beam => ("stationary_phase", "none"),
        Oracle::PdeSolver => ("pde_solver", "none"),
        Oracle::Both => ("stationary_phase", "pde_solver"),
    };
    Ok(InterferenceReport {
        measured_peak: measured,
        predicted,
        alpha_used: alpha,
        alpha_estimated: estimate_alpha(measured),
        relative_error: (measured - predicted).abs() / predicted.max(spec.floor),
        k: spec.k,
        method_pair: (first.to_owned(), second.to_owned()),
        normalization: scale * scale,
        i3: 0.0,
        error_bound: spec.k * spec.field.constants.mass / spec.field.constants.hbar * (a1.length - a2.length).abs(),
        oracle_peak: if oracle == Oracle::Both { pde_peak } else { None },
    })
}
