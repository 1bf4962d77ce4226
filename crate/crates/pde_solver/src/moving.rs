//! Field-free evolution on the moving domain Ω(τ) = unit disk minus the blocks
//! {±x₁ ≥ τ, |x₂| ≤ h}, with piecewise-constant potentials on the upper and lower
//! halves. The mask follows τ(t) step by step; cells leaving the domain are zeroed.

use std::fmt;
use std::sync::Arc;

use abw_core::{Complex64, Domain, GridField, GridSpec};
use ndarray::{Array2, Zip};

use crate::stepper::schedule;
use crate::{LinkPhases, Propagator, SolverConfig, SolverError};

pub type ScalarSchedule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct MovingDomainSchedule {
    /// Inner face position τ(t) of the two blocks.
    pub tau_of_t: ScalarSchedule,
    /// Half-height h of the blocks.
    pub block_height: f64,
    pub radius: f64,
    pub t_hold: f64,
    /// Potentials (volts) on x₂ ≥ 0 and x₂ < 0.
    pub v1: ScalarSchedule,
    pub v2: ScalarSchedule,
    /// Largest fraction of ‖u‖² a single projection may remove.
    pub max_norm_loss: f64,
}

impl fmt::Debug for MovingDomainSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MovingDomainSchedule")
            .field("block_height", &self.block_height)
            .field("radius", &self.radius)
            .field("t_hold", &self.t_hold)
            .field("max_norm_loss", &self.max_norm_loss)
            .finish_non_exhaustive()
    }
}

/// τ = ½ − t, then 0 for a hold of length T, then t − ½ − T.
pub fn standard_tau(t_hold: f64) -> ScalarSchedule {
    Arc::new(move |t: f64| {
        if t <= 0.5 {
            0.5 - t.max(0.0)
        } else if t <= 0.5 + t_hold {
            0.0
        } else {
            (t - 0.5 - t_hold).min(0.5)
        }
    })
}

fn zero() -> ScalarSchedule {
    Arc::new(|_| 0.0)
}

impl MovingDomainSchedule {
    /// The close–hold–reopen schedule with no potential.
    pub fn standard(t_hold: f64) -> Self {
        Self {
            tau_of_t: standard_tau(t_hold),
            block_height: 0.5,
            radius: 1.0,
            t_hold,
            v1: zero(),
            v2: zero(),
            max_norm_loss: 1e-2,
        }
    }

    /// Blocks frozen at τ.
    pub fn fixed(tau: f64) -> Self {
        Self {
            tau_of_t: Arc::new(move |_| tau),
            ..Self::standard(0.0)
        }
    }

    pub fn with_potentials(mut self, v1: ScalarSchedule, v2: ScalarSchedule) -> Self {
        self.v1 = v1;
        self.v2 = v2;
        self
    }

    /// Total duration T + 1 of the standard schedule.
    pub fn duration(&self) -> f64 {
        self.t_hold + 1.0
    }

    pub fn tau(&self, t: f64) -> f64 {
        (self.tau_of_t)(t)
    }

    pub fn mask_at(&self, grid: &GridSpec, t: f64) -> Array2<bool> {
        let tau = self.tau(t);
        let (r, h) = (self.radius, self.block_height);
        Array2::from_shape_fn(grid.shape(), |(j, i)| {
            let p = grid.point(i, j);
            let inside = p.norm() < r;
            let blocked = p.x2.abs() <= h && p.x1.abs() >= tau;
            inside && !blocked
        })
    }

    fn potential_at(&self, grid: &GridSpec, charge: f64, t: f64) -> Array2<f64> {
        let (a, b) = (charge * (self.v1)(t), charge * (self.v2)(t));
        Array2::from_shape_fn(grid.shape(), |(j, i)| {
            let y = grid.point(i, j).x2;
            if y >= 0.0 {
                a
            } else {
                b
            }
        })
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.radius > 0.0 && self.block_height > 0.0 && self.t_hold >= 0.0 && self.max_norm_loss >= 0.0) {
            return Err(SolverError::InvalidConfig("moving-domain schedule parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Zeroes inactive cells, returning the removed fraction of ‖u‖².
fn project(values: &mut Array2<Complex64>, mask: &Array2<bool>) -> f64 {
    let mut total = 0.0;
    let mut lost = 0.0;
    Zip::from(values).and(mask).for_each(|z, &m| {
        let n = z.norm_sqr();
        total += n;
        if !m {
            lost += n;
            *z = Complex64::new(0.0, 0.0);
        }
    });
    if total > 0.0 {
        lost / total
    } else {
        0.0
    }
}

fn run_moving(
    initial: &GridField,
    schedule_: &MovingDomainSchedule,
    config: &SolverConfig,
    t0: f64,
    times: &[f64],
) -> Result<Vec<GridField>, SolverError> {
    config.validate()?;
    schedule_.validate()?;
    let grid = config.grid;
    if initial.spec != grid {
        return Err(SolverError::MaskMismatch);
    }
    let mut mask = schedule_.mask_at(&grid, t0);
    let mut prop = Propagator::new(*config, LinkPhases::identity(&grid), mask.clone())?;
    let mut state = initial.clone();
    state.mask.assign(&mask);
    project(&mut state.values, &mask);
    let mut out = Vec::with_capacity(times.len());
    for (t, h, snap) in schedule(t0, times, config.dt)? {
        if h > 0.0 {
            let mid = t + 0.5 * h;
            let next = schedule_.mask_at(&grid, mid);
            if next != mask {
                let lost = project(&mut state.values, &next);
                if lost > schedule_.max_norm_loss {
                    return Err(SolverError::NormLossExceeded { fraction: lost, time: mid });
                }
                mask = next;
                prop.set_mask(mask.clone())?;
            }
            let ev = schedule_.potential_at(&grid, config.constants.charge, mid);
            prop.step_with(&mut state, &ev, h)?;
        }
        if snap.is_some() {
            out.push(state.clone());
        }
    }
    Ok(out)
}

/// Evolves from t = 0 and returns snapshots at the requested times.
pub fn evolve_moving_domain(
    initial: &GridField,
    schedule: &MovingDomainSchedule,
    config: &SolverConfig,
    snapshot_times: &[f64],
) -> Result<Vec<GridField>, SolverError> {
    run_moving(initial, schedule, config, 0.0, snapshot_times)
}

fn conj(field: &GridField) -> GridField {
    let mut f = field.clone();
    f.values.mapv_inplace(|z| z.conj());
    f
}

/// Field-free backward solve on a static domain: the state `t_span` earlier.
pub fn backward_evolve(final_: &GridField, domain: &Domain, t_span: f64, config: &SolverConfig) -> Result<GridField, SolverError> {
    let field = abw_gauge::GaugeField::new(config.constants);
    let mut snaps = crate::evolve(&conj(final_), &field, domain, t_span, config, &[])?;
    Ok(conj(&snaps.pop().expect("one snapshot")))
}

/// Field-free backward solve on the moving domain from `t_from` down to `t_to`.
pub fn backward_evolve_moving(
    final_: &GridField,
    schedule: &MovingDomainSchedule,
    config: &SolverConfig,
    t_from: f64,
    t_to: f64,
) -> Result<GridField, SolverError> {
    if !(t_to <= t_from) {
        return Err(SolverError::BadSnapshotTime(t_to));
    }
    let tau = schedule.tau_of_t.clone();
    let reversed = MovingDomainSchedule {
        tau_of_t: Arc::new(move |s| tau(t_from - s)),
        v1: zero(),
        v2: zero(),
        max_norm_loss: 1.0,
        ..schedule.clone()
    };
    let mut snaps = run_moving(&conj(final_), &reversed, config, 0.0, &[t_from - t_to])?;
    Ok(conj(&snaps.pop().expect("one snapshot")))
}
