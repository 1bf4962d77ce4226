//! Magnetic AB interference: two beams meeting at a probe after passing on either
//! side of flux-carrying obstacles, evaluated by stationary phase or by the grid oracle.

use abw_beam::{BeamSolution, BeamSpec, BrokenBeam, Method, StraightBeam, TableResolution, TimeScaling};
use abw_core::{Complex64, Domain, Vec2};
use abw_gauge::{flux_decomposition, GaugeField, GaugeTransform};
use serde::{Deserialize, Serialize};

use crate::common::{estimate_alpha, loop_flux, predicted_peak, probe_points, reduce_alpha, reference_field, wrap_phase};
use crate::oracle::{pde_probe_values, PdeOracle};
use crate::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KSelection {
    Given(f64),
    /// Smallest resonant k_m > k₀ with m ≥ n.
    Resonant(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Oracle {
    #[default]
    Beam,
    PdeSolver,
    Both,
}

/// Shape of the ω-beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Layout {
    /// Both beams straight.
    #[default]
    Straight,
    /// ω-beam reflects off obstacles before reaching the probe.
    Broken { max_reflections: usize },
}

/// Two-beam interference setup. Beam ω arrives at the probe along its path, beam θ
/// along a straight line; `travel` is the distance kt covered at the probe time.
#[derive(Debug, Clone)]
pub struct MagneticABSpec {
    pub domain: Domain,
    pub field: GaugeField,
    pub beam_omega: BeamSpec,
    pub beam_theta: BeamSpec,
    pub probe_center: Vec2,
    pub probe_radius: f64,
    pub k_selection: KSelection,
    pub travel: f64,
    pub layout: Layout,
    pub method: Method,
    pub probe_rings: usize,
    /// Largest tolerated phase error bound (radians).
    pub phase_tolerance: f64,
    /// Absolute floor of the relative-error denominator.
    pub floor: f64,
    /// Gauge multiplying both initial data; the field should be transformed alike.
    pub initial_gauge: Option<GaugeTransform>,
    pub pde: Option<PdeOracle>,
}

impl MagneticABSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        domain: Domain,
        field: GaugeField,
        beam_omega: BeamSpec,
        beam_theta: BeamSpec,
        probe_center: Vec2,
        probe_radius: f64,
        k_selection: KSelection,
        travel: f64,
    ) -> Self {
        Self {
            domain,
            field,
            beam_omega,
            beam_theta,
            probe_center,
            probe_radius,
            k_selection,
            travel,
            layout: Layout::Straight,
            method: Method::StationaryPhase,
            probe_rings: 4,
            phase_tolerance: 0.5,
            floor: 0.05,
            initial_gauge: None,
            pde: None,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        self.beam_omega.validate()?;
        self.beam_theta.validate()?;
        if !(self.travel > 0.0 && self.probe_radius >= 0.0 && self.phase_tolerance > 0.0 && self.floor > 0.0) {
            return Err(ExperimentError::InvalidSpec(
                "travel, tolerance and floor must be positive, probe radius non-negative".into(),
            ));
        }
        if let KSelection::Given(k) = self.k_selection {
            if !(k > 0.0 && k.is_finite()) {
                return Err(ExperimentError::InvalidSpec(format!("k must be positive, got {k}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    /// max over the probe of |u − v|², divided by `normalization`.
    pub measured_peak: f64,
    /// 4 sin²(α/2).
    pub predicted: f64,
    /// Enclosed flux, reduced to [0, π].
    pub alpha_used: f64,
    pub alpha_estimated: f64,
    pub relative_error: f64,
    pub k: f64,
    pub method_pair: (String, String),
    /// |2c₀|² of the ω-beam at the probe (1 for straight beams on the plateau).
    pub normalization: f64,
    /// Closing-segment integral between the two initial positions (reference gauge).
    pub i3: f64,
    pub error_bound: f64,
    /// Grid-oracle peak when the oracle ran alongside the beam method.
    pub oracle_peak: Option<f64>,
}

impl InterferenceReport {
    /// |beam − oracle| / max(oracle, floor), when both ran.
    pub fn oracle_disagreement(&self, floor: f64) -> Option<f64> {
        self.oracle_peak
            .map(|o| (self.measured_peak - o).abs() / o.max(floor))
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::StationaryPhase => "stationary_phase",
        Method::Quadrature => "quadrature",
    }
}

/// Probe time t = travel / k.
fn probe_time(spec: &MagneticABSpec, k: f64) -> f64 {
    spec.travel / k
}

fn with_k(spec: &BeamSpec, k: f64) -> BeamSpec {
    BeamSpec { k, ..spec.clone() }
}

/// ψ_ω(x⁰) − ψ_θ(x⁰) and the arrival direction of the ω-beam at the probe.
fn phase_offset(spec: &MagneticABSpec) -> Result<(f64, Vec2), ExperimentError> {
    let x0 = spec.probe_center;
    let theta = spec.beam_theta.direction;
    match spec.layout {
        Layout::Straight => {
            let w = spec.beam_omega.direction;
            Ok((x0.dot(w - theta), w))
        }
        Layout::Broken { max_reflections } => {
            let b = broken_beam(spec, spec.beam_omega.k, max_reflections)?;
            let s = arrival_sample(&b, x0, spec.travel)?;
            let leg = &b.ray().legs[s.leg];
            Ok((s.psi - x0.dot(theta), leg.direction))
        }
    }
}

fn broken_beam(spec: &MagneticABSpec, k: f64, max_reflections: usize) -> Result<BrokenBeam, ExperimentError> {
    Ok(BrokenBeam::new(
        with_k(&spec.beam_omega, k),
        spec.field.clone(),
        &spec.domain,
        max_reflections,
        spec.initial_gauge.clone(),
    )?)
}

fn arrival_sample(b: &BrokenBeam, x0: Vec2, travel: f64) -> Result<abw_beam::BrokenSample, ExperimentError> {
    b.samples(x0, travel)?
        .into_iter()
        .filter(|s| s.c0.norm() > 0.0)
        .max_by(|a, b| a.c0.norm().total_cmp(&b.c0.norm()))
        .ok_or_else(|| ExperimentError::NoPathFound(format!("no leg of the broken beam reaches ({}, {})", x0.x1, x0.x2)))
}

/// Resonant velocity parameter: (mk/ħ)(ψ_ω − ψ_θ)(x⁰) ∈ 2πℤ. Returns
/// k_m = 2πmħ/(m_e|Δψ|) for the smallest m ≥ n with k_m > k₀ (k₀ = the ω-beam's k);
/// k₀ itself when the offset vanishes identically.
pub fn resonant_k(spec: &MagneticABSpec, n: u32) -> Result<f64, ExperimentError> {
    let (delta, arrival) = phase_offset(spec)?;
    if (arrival - spec.beam_theta.direction).norm() < 1e-12 {
        return Err(ExperimentError::DegenerateGeometry("ω = θ: the two beams coincide".into()));
    }
    let k0 = spec.beam_omega.k;
    let c = &spec.beam_omega.constants;
    if delta.abs() < 1e-12 {
        return Ok(k0);
    }
    let unit = 2.0 * std::f64::consts::PI * c.hbar / (c.mass * delta.abs());
    let m_min = (k0 / unit).floor() + 1.0;
    Ok(unit * m_min.max(n as f64))
}

fn resolve_k(spec: &MagneticABSpec) -> Result<f64, ExperimentError> {
    match spec.k_selection {
        KSelection::Given(k) => Ok(k),
        KSelection::Resonant(n) => resonant_k(spec, n),
    }
}

struct Setup {
    k: f64,
    probes: Vec<Vec2>,
    alpha: f64,
    i3: f64,
    bound: f64,
}

fn finish(
    spec: &MagneticABSpec,
    setup: &Setup,
    oracle: Oracle,
    beam_peak: Option<f64>,
    pde_peak: Option<f64>,
    normalization: f64,
) -> InterferenceReport {
    let measured = beam_peak.or(pde_peak).unwrap_or(0.0);
    let predicted = predicted_peak(setup.alpha);
    let beam_name = method_name(spec.method).to_owned();
    let (first, second) = match oracle {
        Oracle::Beam => (beam_name, "none".to_owned()),
        Oracle::PdeSolver => ("pde_solver".to_owned(), "none".to_owned()),
        Oracle::Both => (beam_name, "pde_solver".to_owned()),
    };
    InterferenceReport {
        measured_peak: measured,
        predicted,
        alpha_used: setup.alpha,
        alpha_estimated: estimate_alpha(measured),
        relative_error: (measured - predicted).abs() / predicted.max(spec.floor),
        k: setup.k,
        method_pair: (first, second),
        normalization,
        i3: setup.i3,
        error_bound: setup.bound,
        oracle_peak: if oracle == Oracle::Both { pde_peak } else { None },
    }
}

fn peak(u: &[Complex64], v: &[Complex64], scale: f64) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b * scale).norm_sqr()).fold(0.0, f64::max)
}

fn oracle_cfg(spec: &MagneticABSpec) -> Result<&PdeOracle, ExperimentError> {
    spec.pde
        .as_ref()
        .ok_or_else(|| ExperimentError::InvalidSpec("the PDE oracle needs a `pde` box".into()))
}

/// Phase-error budget: closing segment, probe spread and off-resonance remainder.
fn error_bound(spec: &MagneticABSpec, k: f64, delta: f64, arrival: Vec2, i3: f64) -> f64 {
    let kw = spec.beam_omega.constants.wavenumber(k);
    i3.abs() + kw * spec.probe_radius * (arrival - spec.beam_theta.direction).norm() + wrap_phase(kw * delta).abs()
}

/// Single obstacle, two straight beams.
pub fn magnetic_ab_single(spec: &MagneticABSpec, oracle: Oracle) -> Result<InterferenceReport, ExperimentError> {
    spec.validate()?;
    if spec.layout != Layout::Straight {
        return Err(ExperimentError::InvalidSpec("magnetic_ab_single needs straight beams".into()));
    }
    let k = resolve_k(spec)?;
    let t = probe_time(spec, k);
    let x0 = spec.probe_center;
    let (so, st) = (with_k(&spec.beam_omega, k), with_k(&spec.beam_theta, k));
    let (w, th) = (so.direction, st.direction);
    let (po, pt) = (x0 - w * spec.travel, x0 - th * spec.travel);
    let alpha = reduce_alpha(loop_flux(&spec.field, vec![po, x0, pt])?);
    let i3 = reference_field(&spec.field).segment_phase(po, pt)?;
    let (delta, arrival) = phase_offset(spec)?;
    let bound = error_bound(spec, k, delta, arrival, i3);
    if bound > spec.phase_tolerance {
        return Err(ExperimentError::ErrorBudgetExceeded {
            bound,
            tolerance: spec.phase_tolerance,
        });
    }
    let setup = Setup {
        k,
        probes: probe_points(x0, spec.probe_radius, spec.probe_rings),
        alpha,
        i3,
        bound,
    };
    let res = TableResolution::default();
    let bo = StraightBeam::with_options(so, spec.field.clone(), spec.initial_gauge.clone(), res)?;
    let bt = StraightBeam::with_options(st, spec.field.clone(), spec.initial_gauge.clone(), res)?;
    for b in [&bo, &bt] {
        let wd = b.spec().longitudinal_width();
        b.check_strip(&spec.domain, -wd, spec.travel + wd)?;
    }
    let mut beam_peak = None;
    if oracle != Oracle::PdeSolver {
        let so = BeamSolution::straight(bo.clone(), spec.method, TimeScaling::Plain);
        let stt = BeamSolution::straight(bt.clone(), spec.method, TimeScaling::Plain);
        let u = setup.probes.iter().map(|&x| so.evaluate(x, t)).collect::<Result<Vec<_>, _>>()?;
        let v = setup.probes.iter().map(|&x| stt.evaluate(x, t)).collect::<Result<Vec<_>, _>>()?;
        if u.iter().chain(&v).any(|z| z.norm() == 0.0) {
            return Err(ExperimentError::InvalidSpec("probe disk leaves the support of a beam".into()));
        }
        beam_peak = Some(peak(&u, &v, 1.0));
    }
    let mut pde_peak = None;
    if oracle != Oracle::Beam {
        let cfg = oracle_cfg(spec)?.config(k, so_constants(spec), x0)?;
        let init = |x: Vec2| -> Result<Complex64, ExperimentError> { Ok(bo.initial_data(x)? - bt.initial_data(x)?) };
        let vals = pde_probe_values(&spec.domain, &spec.field, &cfg, &init, t, &setup.probes)?;
        let zero = vec![Complex64::new(0.0, 0.0); vals.len()];
        pde_peak = Some(peak(&vals, &zero, 1.0));
    }
    Ok(finish(spec, &setup, oracle, beam_peak, pde_peak, 1.0))
}

fn so_constants(spec: &MagneticABSpec) -> abw_core::PhysicalConstants {
    spec.beam_omega.constants
}

/// Broken ω-beam against a straight θ-beam. The θ-beam is scaled by |2c₀(x⁰)| of the
/// ω-beam and the peak is reported divided by |2c₀|².
pub fn magnetic_ab_broken(spec: &MagneticABSpec, oracle: Oracle) -> Result<InterferenceReport, ExperimentError> {
    spec.validate()?;
    let Layout::Broken { max_reflections } = spec.layout else {
        return Err(ExperimentError::InvalidSpec("magnetic_ab_broken needs a broken layout".into()));
    };
    let k = resolve_k(spec)?;
    let t = probe_time(spec, k);
    let x0 = spec.probe_center;
    let bo = broken_beam(spec, k, max_reflections)?;
    let st = with_k(&spec.beam_theta, k);
    let th = st.direction;
    let arrival = arrival_sample(&bo, x0, spec.travel)?;
    let c0 = arrival.c0.norm();
    if c0 < 1e-8 {
        return Err(ExperimentError::DegenerateGeometry("|c₀| vanishes at the probe".into()));
    }
    let scale = 2.0 * c0;
    let pt = x0 - th * spec.travel;
    let mut polygon = vec![arrival.origin];
    polygon.extend(bo.ray().legs[1..=arrival.leg].iter().map(|l| l.start));
    polygon.extend([x0, pt]);
    let alpha = reduce_alpha(loop_flux(&spec.field, polygon)?);
    let i3 = reference_field(&spec.field).segment_phase(pt, arrival.origin)?;
    let delta = arrival.psi - x0.dot(th);
    let dir = bo.ray().legs[arrival.leg].direction;
    let bound = error_bound(spec, k, delta, dir, i3);
    if bound > spec.phase_tolerance {
        return Err(ExperimentError::ErrorBudgetExceeded {
            bound,
            tolerance: spec.phase_tolerance,
        });
    }
    let setup = Setup {
        k,
        probes: probe_points(x0, spec.probe_radius, spec.probe_rings),
        alpha,
        i3,
        bound,
    };
    let bt = StraightBeam::with_options(st, spec.field.clone(), spec.initial_gauge.clone(), TableResolution::default())?;
    let wd = bt.spec().longitudinal_width();
    bt.check_strip(&spec.domain, -wd, spec.travel + wd)?;
    let mut beam_peak = None;
    if oracle != Oracle::PdeSolver {
        let so = BeamSolution::broken(bo.clone());
        let stt = BeamSolution::straight(bt.clone(), Method::StationaryPhase, TimeScaling::Plain);
        let u = setup.probes.iter().map(|&x| so.evaluate(x, spec.travel)).collect::<Result<Vec<_>, _>>()?;
        let v = setup.probes.iter().map(|&x| stt.evaluate(x, t)).collect::<Result<Vec<_>, _>>()?;
        if u.iter().chain(&v).any(|z| z.norm() == 0.0) {
            return Err(ExperimentError::InvalidSpec("probe disk leaves the support of a beam".into()));
        }
        beam_peak = Some(peak(&u, &v, scale) / (scale * scale));
    }
    let mut pde_peak = None;
    if oracle != Oracle::Beam {
        let cfg = oracle_cfg(spec)?.config(k, so_constants(spec), x0)?;
        let init = |x: Vec2| -> Result<Complex64, ExperimentError> { Ok(bo.initial_data(x)? - bt.initial_data(x)? * scale) };
        let vals = pde_probe_values(&spec.domain, &spec.field, &cfg, &init, t, &setup.probes)?;
        let zero = vec![Complex64::new(0.0, 0.0); vals.len()];
        pde_peak = Some(peak(&vals, &zero, 1.0) / (scale * scale));
    }
    Ok(finish(spec, &setup, oracle, beam_peak, pde_peak, scale * scale))
}

/// Beam-method |u − v|² at arbitrary points, normalized as in the reports.
pub fn interference_profile(spec: &MagneticABSpec, points: &[Vec2]) -> Result<Vec<f64>, ExperimentError> {
    spec.validate()?;
    let k = resolve_k(spec)?;
    let t = probe_time(spec, k);
    let res = TableResolution::default();
    match spec.layout {
        Layout::Straight => {
            let beam = |b: &BeamSpec| -> Result<BeamSolution, ExperimentError> {
                let sb = StraightBeam::with_options(with_k(b, k), spec.field.clone(), spec.initial_gauge.clone(), res)?;
                Ok(BeamSolution::straight(sb, spec.method, TimeScaling::Plain))
            };
            let (u, v) = (beam(&spec.beam_omega)?, beam(&spec.beam_theta)?);
            points
                .iter()
                .map(|&x| Ok((u.evaluate(x, t)? - v.evaluate(x, t)?).norm_sqr()))
                .collect()
        }
        Layout::Broken { max_reflections } => {
            let bo = broken_beam(spec, k, max_reflections)?;
            let scale = 2.0 * arrival_sample(&bo, spec.probe_center, spec.travel)?.c0.norm();
            if scale < 2e-8 {
                return Err(ExperimentError::DegenerateGeometry("|c₀| vanishes at the probe".into()));
            }
            let bt = StraightBeam::with_options(with_k(&spec.beam_theta, k), spec.field.clone(), spec.initial_gauge.clone(), res)?;
            let u = BeamSolution::broken(bo);
            let v = BeamSolution::straight(bt, Method::StationaryPhase, TimeScaling::Plain);
            points
                .iter()
                .map(|&x| Ok((u.evaluate(x, spec.travel)? - v.evaluate(x, t)? * scale).norm_sqr() / (scale * scale)))
                .collect()
        }
    }
}

/// (α_used, α_estimated) per report.
pub fn estimate_flux(reports: &[InterferenceReport]) -> Vec<(f64, f64)> {
    reports.iter().map(|r| (r.alpha_used, estimate_alpha(r.measured_peak))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxStudyRow {
    pub n: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// −I₁ + I₂ + I₃.
    pub combined: f64,
    /// |I₃| / sin φ.
    pub c_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxStudy {
    /// Flux enclosed by the triangle for large N.
    pub alpha: f64,
    pub sin_phi: f64,
    pub rows: Vec<FluxStudyRow>,
    /// Smallest scanned N beyond which |combined − α| ≤ tolerance throughout.
    pub n0: Option<f64>,
    pub c_mean: f64,
    /// max |C_N/C̄ − 1|.
    pub c_spread: f64,
}

/// Partial integrals I₁N, I₂N, I₃N at x⁰ for each N, with sin φ = |ω − θ|/2.
pub fn flux_decomposition_study(
    field: &GaugeField,
    x0: Vec2,
    omega: Vec2,
    theta: Vec2,
    ns: &[f64],
    tolerance: f64,
) -> Result<FluxStudy, ExperimentError> {
    let sin_phi = 0.5 * (omega - theta).norm();
    if sin_phi < 1e-12 {
        return Err(ExperimentError::DegenerateGeometry("ω = θ".into()));
    }
    let n_max = ns.iter().copied().fold(0.0, f64::max);
    if ns.is_empty() || !(n_max > 0.0) {
        return Err(ExperimentError::InvalidSpec("need positive N values".into()));
    }
    let alpha = loop_flux(field, vec![x0, x0 - omega * n_max, x0 - theta * n_max])?;
    let row = |n: f64| -> Result<FluxStudyRow, ExperimentError> {
        let rep = flux_decomposition(field, x0, omega, theta, n)?;
        let (i1, i2, i3) = rep.partial_integrals.expect("decomposition");
        Ok(FluxStudyRow {
            n,
            i1,
            i2,
            i3,
            combined: rep.flux,
            c_fit: i3.abs() / sin_phi,
        })
    };
    let rows = ns.iter().map(|&n| row(n)).collect::<Result<Vec<_>, _>>()?;
    let scan: Vec<f64> = (1..=(2.0 * n_max).ceil() as usize).map(|j| 0.5 * j as f64).collect();
    let mut ok = Vec::with_capacity(scan.len());
    for &n in &scan {
        let r = row(n);
        ok.push(matches!(r, Ok(ref r) if (r.combined - alpha).abs() <= tolerance));
    }
    let n0 = (0..scan.len()).find(|&i| ok[i..].iter().all(|&b| b)).map(|i| scan[i]);
    let c_mean = rows.iter().map(|r| r.c_fit).sum::<f64>() / rows.len() as f64;
    let c_spread = rows.iter().map(|r| (r.c_fit / c_mean - 1.0).abs()).fold(0.0, f64::max);
    Ok(FluxStudy {
        alpha,
        sin_phi,
        rows,
        n0,
        c_mean,
        c_spread,
    })
}
