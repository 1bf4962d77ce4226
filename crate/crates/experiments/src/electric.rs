//! Electric AB effect on the close–hold–reopen domain: potentials V₁, V₂ switched on
//! while the two halves are disconnected, compared against the potential-free run.

use std::f64::consts::PI;
use std::sync::Arc;

use abw_core::{mollifier_eval, Complex64, GridField, Vec2};
use abw_solver::{backward_evolve_moving, evolve_moving_domain, MovingDomainSchedule, ScalarSchedule, SolverConfig};
use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::ExperimentError;

/// Gaussian bumps placed at the start of the hold window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackwardSpec {
    pub centers: Vec<Vec2>,
    pub width: f64,
}

impl Default for BackwardSpec {
    fn default() -> Self {
        Self {
            centers: vec![Vec2::new(0.0, 0.75), Vec2::new(0.0, -0.75)],
            width: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum InitialData {
    Given(GridField),
    /// Solve backward from data prescribed when the domain has just closed.
    BackwardConstructed(BackwardSpec),
}

#[derive(Debug, Clone)]
pub struct ElectricABSpec {
    /// Domain motion; its potentials are replaced by the α-scaled pulses.
    pub schedule: MovingDomainSchedule,
    pub initial: InitialData,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Relative L² density difference separating effect from no effect.
    pub threshold: f64,
    /// Snapshots in the reopening window (T + ½, T + 1].
    pub window_samples: usize,
}

impl ElectricABSpec {
    pub fn new(t_hold: f64, alpha1: f64, alpha2: f64) -> Self {
        Self {
            schedule: MovingDomainSchedule::standard(t_hold),
            initial: InitialData::BackwardConstructed(BackwardSpec::default()),
            alpha1,
            alpha2,
            threshold: 0.05,
            window_samples: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricReport {
    /// (t, ‖|v|² − |w|²‖ / ‖|w|²‖) over the reopening window.
    pub density_reports: Vec<(f64, f64)>,
    pub max_difference: f64,
    pub threshold: f64,
    /// Whether α₁ − α₂ ∉ 2πℤ.
    pub effect_expected: bool,
    pub detected: bool,
    /// detected == effect_expected.
    pub verdict: bool,
    /// Fractions of ‖u‖² on x₂ > 0 and x₂ < 0 in the middle of the hold window.
    pub hold_fractions: (f64, f64),
}

/// Unit-integral pulse supported in the middle 80% of the hold window [½, ½ + T].
pub fn hold_pulse(t_hold: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    let center = 0.5 + 0.5 * t_hold;
    let half = 0.4 * t_hold;
    // ∫χ₀ = 3/2 on [−1, 1]
    move |t: f64| mollifier_eval((t - center) / half) / (1.5 * half)
}

fn potential(alpha: f64, hbar: f64, charge: f64, t_hold: f64) -> ScalarSchedule {
    let eta = hold_pulse(t_hold);
    let amp = hbar * alpha / charge;
    Arc::new(move |t| amp * eta(t))
}

fn initial_state(spec: &ElectricABSpec, config: &SolverConfig) -> Result<GridField, ExperimentError> {
    match &spec.initial {
        InitialData::Given(g) => {
            if g.spec != config.grid {
                return Err(ExperimentError::InvalidSpec("initial data grid differs from the solver grid".into()));
            }
            Ok(g.clone())
        }
        InitialData::BackwardConstructed(b) => {
            if b.centers.is_empty() || !(b.width > 0.0) {
                return Err(ExperimentError::InvalidSpec("backward construction needs centers and a positive width".into()));
            }
            let grid = config.grid;
            let mask = spec.schedule.mask_at(&grid, 0.5);
            let w = b.width;
            let mut hold = GridField::from_fn(grid, mask, |x| {
                let v: f64 = b.centers.iter().map(|c| (-(x - *c).norm_sq() / (2.0 * w * w)).exp()).sum();
                Complex64::new(v, 0.0)
            })?;
            hold.enforce_mask();
            Ok(backward_evolve_moving(&hold, &spec.schedule, config, 0.5, 0.0)?)
        }
    }
}

fn half_fractions(f: &GridField) -> (f64, f64) {
    let (mut up, mut down) = (0.0, 0.0);
    for j in 0..f.spec.ny {
        let y = f.spec.point(0, j).x2;
        let s: f64 = f.values.row(j).iter().map(|z| z.norm_sqr()).sum();
        if y > 0.0 {
            up += s;
        } else if y < 0.0 {
            down += s;
        }
    }
    let total = up + down;
    if total > 0.0 {
        (up / total, down / total)
    } else {
        (0.0, 0.0)
    }
}

/// ‖|a|² − |b|²‖₂ / ‖|b|²‖₂.
pub fn relative_density_difference(a: &GridField, b: &GridField) -> f64 {
    let da: Array2<f64> = a.density();
    let db: Array2<f64> = b.density();
    let num = Zip::from(&da).and(&db).fold(0.0, |s, x, y| s + (x - y) * (x - y));
    let den = db.iter().map(|y| y * y).sum::<f64>();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn in_2pi_z(x: f64) -> bool {
    let r = x.rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r) < 1e-9
}

/// Runs the schedule with and without the potentials and compares densities after
/// the reopening.
pub fn electric_ab(spec: &ElectricABSpec, config: &SolverConfig) -> Result<ElectricReport, ExperimentError> {
    let t_hold = spec.schedule.t_hold;
    if !(t_hold > 0.0 && spec.threshold > 0.0 && spec.window_samples > 0) {
        return Err(ExperimentError::InvalidSpec("hold time, threshold and window samples must be positive".into()));
    }
    let c = config.constants;
    let u0 = initial_state(spec, config)?;
    let free = MovingDomainSchedule {
        v1: Arc::new(|_| 0.0),
        v2: Arc::new(|_| 0.0),
        ..spec.schedule.clone()
    };
    let driven = spec.schedule.clone().with_potentials(
        potential(spec.alpha1, c.hbar, c.charge, t_hold),
        potential(spec.alpha2, c.hbar, c.charge, t_hold),
    );
    let start = 0.5 + t_hold;
    let window: Vec<f64> = (1..=spec.window_samples)
        .map(|i| start + 0.5 * i as f64 / spec.window_samples as f64)
        .collect();
    let mut times = vec![0.5 + 0.5 * t_hold];
    times.extend(&window);
    let w = evolve_moving_domain(&u0, &free, config, &times)?;
    let hold_fractions = half_fractions(&w[0]);
    for (name, frac) in [("x₂ > 0", hold_fractions.0), ("x₂ < 0", hold_fractions.1)] {
        if frac < 0.01 {
            return Err(ExperimentError::InitialDataDegenerate {
                component: name.to_owned(),
                fraction: frac,
            });
        }
    }
    let v = evolve_moving_domain(&u0, &driven, config, &window)?;
    let density_reports: Vec<(f64, f64)> = window
        .iter()
        .zip(v.iter().zip(&w[1..]))
        .map(|(&t, (a, b))| (t, relative_density_difference(a, b)))
        .collect();
    let max_difference = density_reports.iter().map(|r| r.1).fold(0.0, f64::max);
    let effect_expected = !in_2pi_z(spec.alpha1 - spec.alpha2);
    let detected = max_difference > spec.threshold;
    Ok(ElectricReport {
        density_reports,
        max_difference,
        threshold: spec.threshold,
        effect_expected,
        detected,
        verdict: detected == effect_expected,
        hold_fractions,
    })
}
