//! Scenario files: strict JSON, unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abw_beam::{BeamSpec, BrokenBeam, Method, StraightBeam};
use abw_core::{Domain, Obstacle, PhysicalConstants, Vec2};
use abw_experiments::{
    resonant_k, BackwardSpec, ElectricABSpec, ExperimentError, KSelection, Layout, MagneticABSpec, MirrorSpec, Oracle,
    PdeOracle,
};
use abw_gauge::{apply_gauge, Bump, FluxTerm, GaugeField, GaugeTransform, SmoothPhase};
use abw_solver::{MovingDomainSchedule, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    /// Relative paths are taken from the directory of the scenario file.
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub field_dump: FieldDump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldDump {
    #[default]
    Csv,
    Abwf,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    MagneticSingle(MagneticConfig),
    MagneticBroken(MagneticConfig),
    Mirror(MirrorConfig),
    Electric(ElectricConfig),
    BeamValidate(BeamValidateConfig),
    SolverValidate(SolverValidateConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MagneticSingle(_) => "magnetic_single",
            Experiment::MagneticBroken(_) => "magnetic_broken",
            Experiment::Mirror(_) => "mirror",
            Experiment::Electric(_) => "electric",
            Experiment::BeamValidate(_) => "beam_validate",
            Experiment::SolverValidate(_) => "solver_validate",
        }
    }
}

/// Winding numbers per obstacle and smooth bumps applied to field and initial data.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    #[serde(default)]
    pub windings: BTreeMap<String, i64>,
    #[serde(default)]
    pub bumps: Vec<Bump>,
}

impl GaugeConfig {
    pub fn transform(&self) -> GaugeTransform {
        GaugeTransform {
            windings: self.windings.clone(),
            smooth_phase: SmoothPhase::Bumps(self.bumps.clone()),
        }
    }
}

fn default_rings() -> usize {
    4
}
fn default_tolerance() -> f64 {
    0.5
}
fn default_floor() -> f64 {
    0.05
}
fn default_reflections() -> usize {
    4
}
fn default_profile_points() -> usize {
    81
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticConfig {
    pub obstacles: Vec<Obstacle>,
    pub bounding_box: (Vec2, Vec2),
    #[serde(default)]
    pub fluxes: Vec<FluxTerm>,
    pub beam_omega: BeamSpec,
    pub beam_theta: BeamSpec,
    pub probe_center: Vec2,
    #[serde(default)]
    pub probe_radius: f64,
    pub k: KSelection,
    /// Path length kt from launch to the probe.
    pub travel: f64,
    /// Only read by `magnetic_broken`.
    #[serde(default = "default_reflections")]
    pub max_reflections: usize,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_rings")]
    pub probe_rings: usize,
    #[serde(default = "default_tolerance")]
    pub phase_tolerance: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub oracle: Oracle,
    #[serde(default)]
    pub pde: Option<PdeOracle>,
    #[serde(default)]
    pub gauge: Option<GaugeConfig>,
    /// Samples of |u − v|² across the probe written to profile.csv.
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorConfig {
    pub p0: Vec2,
    pub p1: Vec2,
    pub mirrors: (Obstacle, Obstacle),
    pub obstacle: Obstacle,
    #[serde(default)]
    pub fluxes: Vec<FluxTerm>,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub k: f64,
    pub delta1: f64,
    pub longitudinal_width: f64,
    #[serde(default)]
    pub probe_radius: f64,
    #[serde(default = "default_rings")]
    pub probe_rings: usize,
    pub bounding_box: (Vec2, Vec2),
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub oracle: Oracle,
    #[serde(default)]
    pub pde: Option<PdeOracle>,
}

fn default_threshold() -> f64 {
    0.05
}
fn default_window() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectricConfig {
    pub t_hold: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub solver: SolverConfig,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_window")]
    pub window_samples: usize,
    #[serde(default)]
    pub backward: BackwardSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamValidateConfig {
    pub beam: BeamSpec,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub bounding_box: (Vec2, Vec2),
    #[serde(default)]
    pub fluxes: Vec<FluxTerm>,
    pub probe: Vec2,
    /// Physical times t.
    pub times: Vec<f64>,
    /// Sample grid for ‖g_N‖; omitted means no residual column.
    #[serde(default)]
    pub residual_grid: Option<abw_core::GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    pub center: Vec2,
    pub sigma: f64,
    pub wavevector: Vec2,
}

fn default_gauge_bumps() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverValidateConfig {
    pub solver: SolverConfig,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub bounding_box: (Vec2, Vec2),
    #[serde(default)]
    pub fluxes: Vec<FluxTerm>,
    pub initial: GaussianConfig,
    pub t_final: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Random bumps (drawn from the seed) in the gauge-covariance check.
    #[serde(default = "default_gauge_bumps")]
    pub gauge_bumps: usize,
}

/// Reads and parses; syntax and schema errors carry line and column.
pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<ScenarioConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub(crate) fn build_domain(obstacles: &[Obstacle], bounding_box: (Vec2, Vec2)) -> Result<Domain, ExperimentError> {
    Ok(Domain::new(obstacles.to_vec(), bounding_box)?)
}

pub(crate) fn build_field(
    constants: PhysicalConstants,
    fluxes: &[FluxTerm],
    domain: &Domain,
) -> Result<GaugeField, ExperimentError> {
    let mut field = fluxes
        .iter()
        .fold(GaugeField::new(constants), |f, t| f.with_flux(t.obstacle.as_deref(), t.center, t.flux));
    field.attach_to(domain)?;
    Ok(field)
}

pub fn magnetic_spec(cfg: &MagneticConfig, broken: bool) -> Result<MagneticABSpec, ExperimentError> {
    let domain = build_domain(&cfg.obstacles, cfg.bounding_box)?;
    let field = build_field(cfg.beam_omega.constants, &cfg.fluxes, &domain)?;
    let mut spec = MagneticABSpec::new(
        domain,
        field,
        cfg.beam_omega.clone(),
        cfg.beam_theta.clone(),
        cfg.probe_center,
        cfg.probe_radius,
        cfg.k,
        cfg.travel,
    );
    if broken {
        spec.layout = Layout::Broken {
            max_reflections: cfg.max_reflections,
        };
    }
    spec.method = cfg.method;
    spec.probe_rings = cfg.probe_rings;
    spec.phase_tolerance = cfg.phase_tolerance;
    spec.floor = cfg.floor;
    spec.pde = cfg.pde;
    if let Some(g) = &cfg.gauge {
        let g = g.transform();
        spec.field = apply_gauge(&spec.field, &g)?;
        spec.initial_gauge = Some(g);
    }
    Ok(spec)
}

pub fn mirror_spec(cfg: &MirrorConfig) -> Result<MirrorSpec, ExperimentError> {
    let spec = MirrorSpec {
        p0: cfg.p0,
        p1: cfg.p1,
        mirrors: cfg.mirrors.clone(),
        obstacle: cfg.obstacle.clone(),
        field: GaugeField::new(cfg.constants),
        k: cfg.k,
        delta1: cfg.delta1,
        longitudinal_width: cfg.longitudinal_width,
        probe_radius: cfg.probe_radius,
        probe_rings: cfg.probe_rings,
        bounding_box: cfg.bounding_box,
        floor: cfg.floor,
        pde: cfg.pde,
    };
    let domain = spec.domain()?;
    let field = build_field(cfg.constants, &cfg.fluxes, &domain)?;
    Ok(MirrorSpec { field, ..spec })
}

pub fn electric_spec(cfg: &ElectricConfig) -> ElectricABSpec {
    let mut spec = ElectricABSpec::new(cfg.t_hold, cfg.alpha1, cfg.alpha2);
    spec.threshold = cfg.threshold;
    spec.window_samples = cfg.window_samples;
    spec.initial = abw_experiments::InitialData::BackwardConstructed(cfg.backward.clone());
    spec
}

/// Full invariant check without running; an empty list means runnable.
pub fn validate(config: &ScenarioConfig) -> Vec<String> {
    let mut diags = Vec::new();
    let mut push = |r: Result<(), ExperimentError>| {
        if let Err(e) = r {
            diags.push(e.to_string());
        }
    };
    match &config.experiment {
        Experiment::MagneticSingle(c) => push(check_magnetic(c, false)),
        Experiment::MagneticBroken(c) => push(check_magnetic(c, true)),
        Experiment::Mirror(c) => push(check_mirror(c)),
        Experiment::Electric(c) => push(check_electric(c)),
        Experiment::BeamValidate(c) => push(check_beam(c).map(|_| ())),
        Experiment::SolverValidate(c) => push(check_solver(c)),
    }
    diags
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidSpec(msg.into())
}

fn needs_pde(oracle: Oracle, pde: &Option<PdeOracle>) -> Result<(), ExperimentError> {
    if oracle != Oracle::Beam && pde.is_none() {
        return Err(invalid("oracle needs a `pde` box"));
    }
    Ok(())
}

fn check_magnetic(c: &MagneticConfig, broken: bool) -> Result<(), ExperimentError> {
    let spec = magnetic_spec(c, broken)?;
    spec.beam_omega.validate()?;
    spec.beam_theta.validate()?;
    if !(c.travel > 0.0 && c.probe_radius >= 0.0 && c.phase_tolerance > 0.0 && c.floor > 0.0) {
        return Err(invalid("travel, phase_tolerance and floor must be positive, probe_radius non-negative"));
    }
    needs_pde(c.oracle, &c.pde)?;
    let k = match c.k {
        KSelection::Given(k) => k,
        KSelection::Resonant(n) => resonant_k(&spec, n)?,
    };
    let theta = StraightBeam::new(BeamSpec { k, ..spec.beam_theta.clone() }, spec.field.clone())?;
    let wd = theta.spec().longitudinal_width();
    theta.check_strip(&spec.domain, -wd, c.travel + wd)?;
    let omega = BeamSpec { k, ..spec.beam_omega.clone() };
    if broken {
        BrokenBeam::new(omega, spec.field.clone(), &spec.domain, c.max_reflections, None)?;
    } else {
        let b = StraightBeam::new(omega, spec.field.clone())?;
        let wd = b.spec().longitudinal_width();
        b.check_strip(&spec.domain, -wd, c.travel + wd)?;
    }
    Ok(())
}

fn check_mirror(c: &MirrorConfig) -> Result<(), ExperimentError> {
    mirror_spec(c)?;
    if !(c.k > 0.0 && c.delta1 > 0.0 && c.longitudinal_width > 0.0 && c.probe_radius >= 0.0 && c.floor > 0.0) {
        return Err(invalid("k, delta1, longitudinal_width and floor must be positive"));
    }
    needs_pde(c.oracle, &c.pde)
}

fn check_electric(c: &ElectricConfig) -> Result<(), ExperimentError> {
    c.solver.validate()?;
    if !(c.t_hold > 0.0 && c.threshold > 0.0 && c.window_samples > 0) {
        return Err(invalid("t_hold, threshold and window_samples must be positive"));
    }
    if c.backward.centers.is_empty() || !(c.backward.width > 0.0) {
        return Err(invalid("backward construction needs centers and a positive width"));
    }
    let grid = c.solver.grid;
    let mask = MovingDomainSchedule::standard(c.t_hold).mask_at(&grid, 0.5);
    for p in &c.backward.centers {
        match grid.nearest(*p) {
            Some((i, j)) if mask[[j, i]] => {}
            _ => return Err(invalid(format!("backward center ({}, {}) lies outside the closed domain", p.x1, p.x2))),
        }
    }
    Ok(())
}

pub(crate) fn check_beam(c: &BeamValidateConfig) -> Result<StraightBeam, ExperimentError> {
    let domain = build_domain(&c.obstacles, c.bounding_box)?;
    let field = build_field(c.beam.constants, &c.fluxes, &domain)?;
    if c.times.is_empty() || c.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid("times must be a non-empty list of positive numbers"));
    }
    let beam = StraightBeam::new(c.beam.clone(), field)?;
    let wd = beam.spec().longitudinal_width();
    let reach = c.times.iter().fold(0.0f64, |m, t| m.max(*t)) * c.beam.k;
    beam.check_strip(&domain, -wd, reach + wd)?;
    Ok(beam)
}

fn check_solver(c: &SolverValidateConfig) -> Result<(), ExperimentError> {
    c.solver.validate()?;
    let domain = build_domain(&c.obstacles, c.bounding_box)?;
    build_field(c.solver.constants, &c.fluxes, &domain)?;
    if !(c.t_final > 0.0 && c.initial.sigma > 0.0) {
        return Err(invalid("t_final and sigma must be positive"));
    }
    if c.snapshots.windows(2).any(|w| w[1] < w[0]) || c.snapshots.iter().any(|t| *t < 0.0 || *t > c.t_final) {
        return Err(invalid("snapshots must be increasing and lie in [0, t_final]"));
    }
    if domain.obstacles.iter().any(|o| o.signed_distance(c.initial.center) <= 0.0) {
        return Err(invalid("initial Gaussian is centred inside an obstacle"));
    }
    Ok(())
}
