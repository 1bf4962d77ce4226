use abw_core::{GridSpec, PhysicalConstants};
use serde::{Deserialize, Serialize};

use crate::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Boundary {
    #[default]
    Dirichlet,
    /// Dirichlet box with a smooth imaginary potential ramp of the given width
    /// along the box edges; `strength` is the peak damping rate W/ħ.
    DirichletPlusAbsorbingRim { width: f64, strength: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Strang-split alternating-direction Crank–Nicolson (tridiagonal solves).
    #[default]
    Adi,
    /// Full Crank–Nicolson, BiCGSTAB with diagonal preconditioning.
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub dt: f64,
    #[serde(default)]
    pub constants: PhysicalConstants,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub scheme: Scheme,
    /// Relative residual for iterative solves.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_iter")]
    pub max_iterations: usize,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_iter() -> usize {
    2000
}

impl SolverConfig {
    pub fn new(grid: GridSpec, dt: f64) -> Self {
        Self {
            grid,
            dt,
            constants: PhysicalConstants::default(),
            boundary: Boundary::Dirichlet,
            scheme: Scheme::Adi,
            tolerance: default_tol(),
            max_iterations: default_iter(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.grid.validate()?;
        self.constants
            .validate()
            .map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if let Boundary::DirichletPlusAbsorbingRim { width, strength } = self.boundary {
            let limit = self.grid.nx.min(self.grid.ny) as f64 * self.grid.spacing / 4.0;
            if !(width > 0.0 && width < limit) {
                return Err(SolverError::InvalidConfig(format!(
                    "absorbing rim width must lie in (0, {limit}), got {width}"
                )));
            }
            if !(strength >= 0.0) {
                return Err(SolverError::InvalidConfig("rim strength must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Grid points per carrier wavelength 2πħ/(mk).
    pub fn points_per_wavelength(&self, k: f64) -> f64 {
        self.constants.wavelength(k) / self.grid.spacing
    }
}
