//! Grid solution of the same initial-value problem, used as an independent check
//! of the beam evaluators.

use abw_core::{Complex64, Domain, GridField, GridSpec, PhysicalConstants, Vec2};
use abw_gauge::GaugeField;
use abw_solver::{evolve, Boundary, SolverConfig};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::ExperimentError;

/// Box, resolution and time step of the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeOracle {
    pub lo: Vec2,
    pub hi: Vec2,
    /// Grid points per carrier wavelength 2πħ/(mk).
    #[serde(default = "default_ppw")]
    pub points_per_wavelength: f64,
    /// Carrier phase mk²t/2ħ advanced per time step.
    #[serde(default = "default_phase_step")]
    pub phase_per_step: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_ppw() -> f64 {
    12.0
}

fn default_phase_step() -> f64 {
    0.5
}

impl PdeOracle {
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        Self {
            lo,
            hi,
            points_per_wavelength: default_ppw(),
            phase_per_step: default_phase_step(),
            boundary: Boundary::Dirichlet,
        }
    }

    /// Solver configuration at velocity parameter k, with `anchor` on a grid node.
    pub fn config(&self, k: f64, constants: PhysicalConstants, anchor: Vec2) -> Result<SolverConfig, ExperimentError> {
        if !(self.points_per_wavelength > 0.0 && self.phase_per_step > 0.0) {
            return Err(ExperimentError::InvalidSpec("oracle resolution must be positive".into()));
        }
        let h = constants.wavelength(k) / self.points_per_wavelength;
        let snap = |lo: f64, a: f64| a - h * ((a - lo) / h).ceil();
        let origin = Vec2::new(snap(self.lo.x1, anchor.x1), snap(self.lo.x2, anchor.x2));
        let nx = ((self.hi.x1 - origin.x1) / h).floor() as usize + 1;
        let ny = ((self.hi.x2 - origin.x2) / h).floor() as usize + 1;
        let grid = GridSpec::new(origin, h, nx, ny)?;
        let dt = self.phase_per_step * 2.0 * constants.hbar / (constants.mass * k * k);
        let mut cfg = SolverConfig::new(grid, dt);
        cfg.constants = constants;
        cfg.boundary = self.boundary;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Evolves `initial` to time `t` and returns the solution at the probe points.
pub fn pde_probe_values(
    domain: &Domain,
    field: &GaugeField,
    config: &SolverConfig,
    initial: &dyn Fn(Vec2) -> Result<Complex64, ExperimentError>,
    t: f64,
    probes: &[Vec2],
) -> Result<Vec<Complex64>, ExperimentError> {
    let grid = config.grid;
    let mut values = Array2::zeros(grid.shape());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            values[[j, i]] = initial(grid.point(i, j))?;
        }
    }
    let start = GridField {
        spec: grid,
        values,
        mask: grid.domain_mask(domain),
    };
    let end = evolve(&start, field, domain, t, config, &[])?.pop().expect("final state");
    probes
        .iter()
        .map(|&p| {
            end.interpolate(p)
                .ok_or_else(|| ExperimentError::InvalidSpec(format!("probe ({}, {}) outside the oracle grid", p.x1, p.x2)))
        })
        .collect()
}
