//! Default geometries of the experiments.

use abw_beam::BeamSpec;
use abw_core::{Domain, GridSpec, Obstacle, PhysicalConstants, Vec2};
use abw_gauge::GaugeField;
use abw_solver::SolverConfig;

use crate::magnetic::{KSelection, Layout, MagneticABSpec};
use crate::mirror::MirrorSpec;
use crate::oracle::PdeOracle;
use crate::ExperimentError;

/// Single-obstacle geometry: probe x⁰ = (0, L) with L = 8, beams ω = (−sin φ, cos φ)
/// and θ = (sin φ, cos φ) with tan φ = 0.05 launched from x⁰, a thin flux tube of
/// radius 0.03 at (0, 5) between them. At the probe time kt = k^{0.4} the waves at x⁰
/// started at x⁰ − ktω and x⁰ − ktθ.
pub fn single_obstacle(alpha: f64, k0: f64) -> Result<MagneticABSpec, ExperimentError> {
    let phi = 0.05f64.atan();
    let (s, c) = phi.sin_cos();
    let (w, th) = (Vec2::new(-s, c), Vec2::new(s, c));
    let x0 = Vec2::new(0.0, 8.0);
    let center = Vec2::new(0.0, 5.0);
    let radius = 0.03;
    let travel = k0.powf(0.4);
    let clearance = (center - x0).cross(w).abs() - radius;
    let delta1 = 0.5 * clearance;
    let delta2 = 2.5 * travel / k0;
    let domain = Domain::new(
        vec![Obstacle::disk("tube", center, radius)?],
        (Vec2::new(-40.0, -40.0), Vec2::new(40.0, 40.0)),
    )?;
    let mut field = GaugeField::new(PhysicalConstants::default()).with_flux(Some("tube"), center, alpha);
    field.attach_to(&domain)?;
    let mut spec = MagneticABSpec::new(
        domain,
        field,
        BeamSpec::new(x0, w, k0, delta1, delta2, 0),
        BeamSpec::new(x0, th, k0, delta1, delta2, 0),
        x0,
        0.005,
        KSelection::Resonant(1),
        travel,
    );
    spec.probe_rings = 4;
    Ok(spec)
}

/// Grid-oracle geometry: beams at ±45° meeting at the origin after travelling 2.7,
/// wide strips (δ₁ = 1.2) and a radius-0.05 flux tube just above the segment joining
/// the launch points. Probe is the single point x⁰ = 0.
pub fn oracle_geometry(alpha: f64, k: f64) -> Result<MagneticABSpec, ExperimentError> {
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let (w, th) = (Vec2::new(-r2, r2), Vec2::new(r2, r2));
    let x0 = Vec2::ZERO;
    let travel = 2.7;
    let center = Vec2::new(0.01, -1.82);
    let domain = Domain::new(
        vec![Obstacle::disk("tube", center, 0.05)?],
        (Vec2::new(-20.0, -20.0), Vec2::new(20.0, 20.0)),
    )?;
    let mut field = GaugeField::new(PhysicalConstants::default()).with_flux(Some("tube"), center, alpha);
    field.attach_to(&domain)?;
    let (d1, d2) = (1.2, 1.6 / k);
    let mut spec = MagneticABSpec::new(
        domain,
        field,
        BeamSpec::new(x0 - w * travel, w, k, d1, d2, 0),
        BeamSpec::new(x0 - th * travel, th, k, d1, d2, 0),
        x0,
        0.0,
        KSelection::Given(k),
        travel,
    );
    spec.phase_tolerance = 10.0;
    spec.pde = Some(PdeOracle::new(Vec2::new(-4.2, -4.2), Vec2::new(4.2, 2.0)));
    Ok(spec)
}

/// Centre of a reflecting disk of radius r touching the specular point `hit` for the
/// turn from `d_in` to `d_out`.
fn mirror_disk_center(hit: Vec2, d_in: Vec2, d_out: Vec2, r: f64) -> Vec2 {
    let n = (d_out - d_in).normalized();
    hit - n * r
}

/// Several-obstacle geometry. The broken ray from x¹ = (2, 2) along (3, 1)/√10
/// reflects off Ω₁ at (5, 3) and Ω₂ at (3, 7) and reaches x⁰ = (−1, 8); the straight
/// θ-beam along (−1, 2)/√5 reaches x⁰ after the same path length. Ω₃ (flux π) sits
/// inside the loop; Ω₂ carries the non-enclosed `decoy` flux.
pub fn several_obstacles(decoy: f64, k0: f64) -> Result<MagneticABSpec, ExperimentError> {
    let x1 = Vec2::new(2.0, 2.0);
    let hits = [Vec2::new(5.0, 3.0), Vec2::new(3.0, 7.0)];
    let x0 = Vec2::new(-1.0, 8.0);
    let d = [
        (hits[0] - x1).normalized(),
        (hits[1] - hits[0]).normalized(),
        (x0 - hits[1]).normalized(),
    ];
    let r = 1.12;
    let c1 = mirror_disk_center(hits[0], d[0], d[1], r);
    let c2 = mirror_disk_center(hits[1], d[1], d[2], r);
    let c3 = Vec2::new(2.5, 4.5);
    let domain = Domain::new(
        vec![
            Obstacle::disk("omega1", c1, r)?,
            Obstacle::disk("omega2", c2, r)?,
            Obstacle::disk("omega3", c3, 0.8)?,
        ],
        (Vec2::new(-30.0, -30.0), Vec2::new(30.0, 30.0)),
    )?;
    let mut field = GaugeField::new(PhysicalConstants::default())
        .with_flux(Some("omega2"), c2, decoy)
        .with_flux(Some("omega3"), c3, std::f64::consts::PI);
    field.attach_to(&domain)?;
    let travel = x1.distance(hits[0]) + hits[0].distance(hits[1]) + hits[1].distance(x0);
    let th = Vec2::new(-1.0, 2.0).normalized();
    let (d1, width) = (0.3, 0.5);
    let mut spec = MagneticABSpec::new(
        domain,
        field,
        BeamSpec::new(x1, d[0], k0, d1, width / k0, 0),
        BeamSpec::new(x0 - th * travel, th, k0, d1, width / k0, 0),
        x0,
        0.002,
        KSelection::Resonant(1),
        travel,
    );
    spec.layout = Layout::Broken { max_reflections: 4 };
    Ok(spec)
}

/// Mirrors with front faces on x₁ = ±3, y ∈ [2.5, 3.5], a unit disk at (0, 3) carrying
/// `alpha`, P₀ = (0, 0) and P₁ = (0, 6).
pub fn mirror(alpha: f64, k: f64) -> Result<MirrorSpec, ExperimentError> {
    let thickness = 0.1;
    let x = 3.0 + 0.5 * thickness;
    let m1 = Obstacle::segment("m1", Vec2::new(x, 2.5), Vec2::new(x, 3.5), thickness)?;
    let m2 = Obstacle::segment("m2", Vec2::new(-x, 2.5), Vec2::new(-x, 3.5), thickness)?;
    let center = Vec2::new(0.0, 3.0);
    let obstacle = Obstacle::disk("disk", center, 1.0)?;
    let field = GaugeField::new(PhysicalConstants::default()).with_flux(Some("disk"), center, alpha);
    Ok(MirrorSpec {
        p0: Vec2::ZERO,
        p1: Vec2::new(0.0, 6.0),
        mirrors: (m1, m2),
        obstacle,
        field,
        k,
        delta1: 0.3,
        longitudinal_width: 1.0,
        probe_radius: 0.0,
        probe_rings: 4,
        bounding_box: (Vec2::new(-10.0, -10.0), Vec2::new(10.0, 16.0)),
        floor: 0.05,
        pde: Some(PdeOracle::new(Vec2::new(-4.5, -2.0), Vec2::new(4.5, 8.0))),
    })
}

/// Unit disk grid with spacing h and step dt for the moving-domain experiments.
pub fn electric_config(h: f64, dt: f64) -> Result<SolverConfig, ExperimentError> {
    let n = (2.2 / h).round() as usize + 1;
    let grid = GridSpec::new(Vec2::new(-1.1, -1.1), h, n, n)?;
    let cfg = SolverConfig::new(grid, dt);
    cfg.validate()?;
    Ok(cfg)
}
