//! Scenario execution and output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use abw_beam::PathExtent;
use abw_core::{Complex64, Domain, GridField, Vec2};
use abw_experiments::{
    electric_ab, interference_profile, magnetic_ab_broken, magnetic_ab_single, mirror_interferometer, resonant_k,
    ExperimentError, InterferenceReport, KSelection, MagneticABSpec,
};
use abw_gauge::{apply_gauge, Bump, GaugeTransform, SmoothPhase};
use abw_solver::{build_link_phases, evolve, write_abwf, write_csv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::{
    build_domain, build_field, check_beam, electric_spec, magnetic_spec, mirror_spec, validate, BeamValidateConfig,
    Experiment, FieldDump, MagneticConfig, ScenarioConfig, SolverValidateConfig,
};
use crate::CliError;

/// Contents of report.json.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub config: ScenarioConfig,
    pub report: Value,
}

impl RunReport {
    /// Name and value of the number a sweep tabulates.
    pub fn headline(&self) -> (&'static str, f64) {
        let get = |k: &str| self.report.get(k).and_then(Value::as_f64).unwrap_or(f64::NAN);
        match self.experiment.as_str() {
            "electric" => ("max_difference", get("max_difference")),
            "beam_validate" => ("max_relative_gap", get("max_relative_gap")),
            "solver_validate" => ("norm_drift", get("norm_drift")),
            _ => ("measured_peak", get("measured_peak")),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

fn write_text(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut w = create(path)?;
    for l in lines {
        writeln!(w, "{l}").map_err(|source| CliError::Write {
            path: path.to_owned(),
            source,
        })?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Output directory with relative paths taken from `base`.
pub fn resolve_output(config: &ScenarioConfig, base: &Path) -> PathBuf {
    if config.output_dir.is_absolute() {
        config.output_dir.clone()
    } else {
        base.join(&config.output_dir)
    }
}

/// Validates, runs and writes report.json plus the experiment's CSV files into the
/// output directory.
pub fn run(config: &ScenarioConfig, base: &Path) -> Result<RunReport, CliError> {
    let diags = validate(config);
    if !diags.is_empty() {
        return Err(CliError::Invalid(diags));
    }
    let out = resolve_output(config, base);
    std::fs::create_dir_all(&out).map_err(|source| CliError::Write {
        path: out.clone(),
        source,
    })?;
    let report = match &config.experiment {
        Experiment::MagneticSingle(c) => run_magnetic(c, false, &out)?,
        Experiment::MagneticBroken(c) => run_magnetic(c, true, &out)?,
        Experiment::Mirror(c) => to_value(&mirror_interferometer(&mirror_spec(c)?, c.oracle)?),
        Experiment::Electric(c) => {
            let r = electric_ab(&electric_spec(c), &c.solver)?;
            let mut lines = vec!["t,relative_density_difference".to_owned()];
            lines.extend(r.density_reports.iter().map(|(t, d)| format!("{t},{d}")));
            write_text(&out.join("density_difference.csv"), &lines)?;
            to_value(&r)
        }
        Experiment::BeamValidate(c) => run_beam(c, &out)?,
        Experiment::SolverValidate(c) => run_solver(c, config.seed, config.field_dump, &out)?,
    };
    let run = RunReport {
        experiment: config.experiment.name().to_owned(),
        config: config.clone(),
        report,
    };
    let path = out.join("report.json");
    let text = serde_json::to_string_pretty(&run).expect("reports serialize");
    write_text(&path, &[text])?;
    Ok(run)
}

fn run_magnetic(c: &MagneticConfig, broken: bool, out: &Path) -> Result<Value, CliError> {
    let spec = magnetic_spec(c, broken)?;
    let report: InterferenceReport = if broken {
        magnetic_ab_broken(&spec, c.oracle)?
    } else {
        magnetic_ab_single(&spec, c.oracle)?
    };
    write_profile(&spec, c.profile_points, out)?;
    Ok(to_value(&report))
}

/// |u − v|² along the line through the probe perpendicular to θ, ±2 wavelengths
/// clipped to 90% of the beam half-width.
fn write_profile(spec: &MagneticABSpec, n: usize, out: &Path) -> Result<(), CliError> {
    if n == 0 {
        return Ok(());
    }
    let k = match spec.k_selection {
        KSelection::Given(k) => k,
        KSelection::Resonant(m) => resonant_k(spec, m)?,
    };
    let delta1 = spec.beam_theta.delta1.min(spec.beam_omega.delta1);
    let span = (2.0 * spec.beam_theta.constants.wavelength(k)).min(0.9 * delta1);
    let across = spec.beam_theta.direction.perp();
    let s: Vec<f64> = (0..n)
        .map(|i| if n == 1 { 0.0 } else { -span + 2.0 * span * i as f64 / (n - 1) as f64 })
        .collect();
    let points: Vec<Vec2> = s.iter().map(|&s| spec.probe_center + across * s).collect();
    let values = interference_profile(spec, &points)?;
    let mut lines = vec!["s,x1,x2,abs_diff_sq".to_owned()];
    lines.extend(
        s.iter()
            .zip(&points)
            .zip(&values)
            .map(|((s, p), v)| format!("{s},{},{},{v}", p.x1, p.x2)),
    );
    write_text(&out.join("profile.csv"), &lines)
}

#[derive(Serialize)]
struct BeamRow {
    t: f64,
    quadrature: Complex64,
    stationary_phase: Complex64,
    relative_gap: f64,
    residual_norm: Option<f64>,
}

fn run_beam(c: &BeamValidateConfig, out: &Path) -> Result<Value, CliError> {
    let beam = check_beam(c)?;
    let mut rows = Vec::new();
    for &t in &c.times {
        let q = beam.quadrature(c.probe, t).map_err(ExperimentError::from)?;
        let s = beam.stationary_phase(c.probe, t, PathExtent::Finite).map_err(ExperimentError::from)?;
        let gap = if s.norm() > 0.0 { (q - s).norm() / s.norm() } else { (q - s).norm() };
        let residual_norm = match &c.residual_grid {
            Some(g) => Some(beam.residual_norm(g, t).map_err(ExperimentError::from)?),
            None => None,
        };
        rows.push(BeamRow {
            t,
            quadrature: q,
            stationary_phase: s,
            relative_gap: gap,
            residual_norm,
        });
    }
    let mut lines = vec!["t,relative_gap,residual_norm".to_owned()];
    lines.extend(rows.iter().map(|r| {
        let res = r.residual_norm.map(|x| x.to_string()).unwrap_or_default();
        format!("{},{},{res}", r.t, r.relative_gap)
    }));
    write_text(&out.join("beam_profile.csv"), &lines)?;
    let max_gap = rows.iter().map(|r| r.relative_gap).fold(0.0, f64::max);
    Ok(serde_json::json!({ "rows": to_value(&rows), "max_relative_gap": max_gap }))
}

fn gaussian(c: &SolverValidateConfig) -> impl Fn(Vec2) -> Complex64 + Sync {
    let g = c.initial;
    move |x: Vec2| {
        let d = x - g.center;
        Complex64::from_polar((-d.norm_sq() / (2.0 * g.sigma * g.sigma)).exp(), g.wavevector.dot(x))
    }
}

/// Windings in −2..=2 for every flux obstacle and `n` bumps inside the box.
fn random_gauge(seed: u64, n: usize, domain: &Domain, flux_obstacles: &[String]) -> GaugeTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = domain.bounding_box;
    let size = (hi.x1 - lo.x1).min(hi.x2 - lo.x2);
    let windings = flux_obstacles.iter().map(|id| (id.clone(), rng.gen_range(-2i64..=2))).collect();
    let bumps = (0..n)
        .map(|_| Bump {
            center: Vec2::new(rng.gen_range(lo.x1..hi.x1), rng.gen_range(lo.x2..hi.x2)),
            radius: rng.gen_range(0.1..0.3) * size,
            amplitude: rng.gen_range(-2.0..2.0),
        })
        .collect();
    GaugeTransform {
        windings,
        smooth_phase: SmoothPhase::Bumps(bumps),
    }
}

fn centroid(f: &GridField) -> Vec2 {
    let (mut m, mut s) = (0.0, Vec2::ZERO);
    for ((j, i), &w) in f.density().indexed_iter() {
        m += w;
        s = s + f.spec.point(i, j) * w;
    }
    if m > 0.0 {
        s * (1.0 / m)
    } else {
        s
    }
}

fn run_solver(c: &SolverValidateConfig, seed: u64, dump: FieldDump, out: &Path) -> Result<Value, CliError> {
    let domain = build_domain(&c.obstacles, c.bounding_box)?;
    let field = build_field(c.solver.constants, &c.fluxes, &domain)?;
    let grid = c.solver.grid;
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(c));
    let mut times = c.snapshots.clone();
    if times.last() != Some(&c.t_final) {
        times.push(c.t_final);
    }
    let snaps = evolve(&u0, &field, &domain, c.t_final, &c.solver, &times).map_err(ExperimentError::from)?;
    let last = snaps.last().expect("final snapshot");
    let n0 = u0.l2_norm();
    let drift = if n0 > 0.0 { (last.l2_norm() - n0).abs() / n0 } else { 0.0 };

    let links = build_link_phases(&field, &grid, &domain).map_err(ExperimentError::from)?;
    let plaquette = links.max_plaquette_flux(&grid.domain_mask(&domain));

    let ids: Vec<String> = field.flux_terms.iter().filter_map(|t| t.obstacle.clone()).collect();
    let g = random_gauge(seed, c.gauge_bumps, &domain, &ids);
    let gauged = apply_gauge(&field, &g).map_err(ExperimentError::from)?;
    let mut v0 = u0.clone();
    let factor = |x: Vec2| g.factor(&field, x).map_err(ExperimentError::from);
    let mut factors = Vec::with_capacity(grid.nx * grid.ny);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            factors.push(if u0.mask[[j, i]] { factor(grid.point(i, j))? } else { Complex64::new(1.0, 0.0) });
        }
    }
    for ((j, i), z) in v0.values.indexed_iter_mut() {
        *z *= factors[j * grid.nx + i];
    }
    let v = evolve(&v0, &gauged, &domain, c.t_final, &c.solver, &[]).map_err(ExperimentError::from)?;
    let covariance = last
        .values
        .indexed_iter()
        .map(|((j, i), z)| (v[0].values[[j, i]] - z * factors[j * grid.nx + i]).norm())
        .fold(0.0, f64::max);

    let cst = c.solver.constants;
    let expected = c.initial.wavevector * (cst.hbar * c.t_final / cst.mass);
    let moved = centroid(last) - centroid(&u0);
    // only meaningful for free propagation
    let velocity_error = (domain.obstacles.is_empty() && expected.norm() > 0.0).then(|| (moved - expected).norm() / expected.norm());

    let mut lines = vec!["t,norm,centroid_x1,centroid_x2".to_owned()];
    for (t, s) in times.iter().zip(&snaps) {
        let p = centroid(s);
        lines.push(format!("{t},{},{},{}", s.l2_norm(), p.x1, p.x2));
    }
    write_text(&out.join("norm.csv"), &lines)?;
    for (k, s) in snaps.iter().enumerate() {
        let (name, res) = match dump {
            FieldDump::None => continue,
            FieldDump::Csv => {
                let p = out.join(format!("field_{k:03}.csv"));
                let r = write_csv(s, create(&p)?);
                (p, r)
            }
            FieldDump::Abwf => {
                let p = out.join(format!("field_{k:03}.abwf"));
                let r = write_abwf(s, create(&p)?);
                (p, r)
            }
        };
        res.map_err(|e| CliError::Write {
            path: name,
            source: std::io::Error::other(e.to_string()),
        })?;
    }
    Ok(serde_json::json!({
        "norm_drift": drift,
        "steps": (c.t_final / c.solver.dt).ceil(),
        "max_plaquette_flux": plaquette,
        "gauge_covariance_error": covariance,
        "centroid_displacement": moved,
        "expected_displacement": expected,
        "group_velocity_error": velocity_error,
        "snapshot_times": times,
    }))
}
