//! Link variables U = exp(i(e/ħc)∫_edge A·dl) on grid edges.

use abw_core::{Complex64, Domain, GridSpec, Vec2};
use abw_gauge::GaugeField;
use ndarray::Array2;

use crate::SolverError;

const CENTER_CLEARANCE: f64 = 1e-6;

/// `horizontal[[j, i]]` sits on the edge (i, j) → (i+1, j); `vertical[[j, i]]` on
/// (i, j) → (i, j+1).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPhases {
    pub horizontal: Array2<Complex64>,
    pub vertical: Array2<Complex64>,
}

impl LinkPhases {
    pub fn identity(grid: &GridSpec) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            horizontal: Array2::from_elem((grid.ny, grid.nx - 1), one),
            vertical: Array2::from_elem((grid.ny - 1, grid.nx), one),
        }
    }

    /// Ordered product around the cell with lower-left node (i, j).
    pub fn plaquette(&self, i: usize, j: usize) -> Complex64 {
        self.horizontal[[j, i]] * self.vertical[[j, i + 1]] * self.horizontal[[j + 1, i]].conj() * self.vertical[[j, i]].conj()
    }

    /// Largest |arg| of the plaquette products over cells whose four corners are
    /// active.
    pub fn max_plaquette_flux(&self, mask: &Array2<bool>) -> f64 {
        let (ny, nx) = mask.dim();
        let mut worst: f64 = 0.0;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                if mask[[j, i]] && mask[[j, i + 1]] && mask[[j + 1, i]] && mask[[j + 1, i + 1]] {
                    worst = worst.max(self.plaquette(i, j).arg().abs());
                }
            }
        }
        worst
    }

    /// Sum of plaquette phases (each reduced to (−π, π]) over the cells whose lower-left
    /// node lies in [i0, i1) × [j0, j1).
    pub fn enclosed_flux(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        let mut acc = 0.0;
        for j in j0..j1 {
            for i in i0..i1 {
                acc += self.plaquette(i, j).arg();
            }
        }
        acc
    }
}

fn segment_near(a: Vec2, b: Vec2, c: Vec2) -> bool {
    let ab = b - a;
    let u = ((c - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    (a + ab * u).distance(c) < CENTER_CLEARANCE
}

/// Link phases from the field's exact segment phases. Edges touching an inactive
/// node carry 1, since the Dirichlet condition makes them irrelevant.
pub fn build_link_phases(field: &GaugeField, grid: &GridSpec, domain: &Domain) -> Result<LinkPhases, SolverError> {
    let mask = grid.domain_mask(domain);
    build_link_phases_masked(field, grid, &mask)
}

pub(crate) fn build_link_phases_masked(field: &GaugeField, grid: &GridSpec, mask: &Array2<bool>) -> Result<LinkPhases, SolverError> {
    let mut links = LinkPhases::identity(grid);
    let edge = |a: Vec2, b: Vec2| -> Result<Complex64, SolverError> {
        for t in &field.flux_terms {
            if segment_near(a, b, t.center) {
                return Err(SolverError::EdgeThroughFluxCenter { x1: t.center.x1, x2: t.center.x2 });
            }
        }
        Ok(Complex64::from_polar(1.0, field.segment_phase(a, b)?))
    };
    for j in 0..grid.ny {
        for i in 0..grid.nx - 1 {
            if mask[[j, i]] && mask[[j, i + 1]] {
                links.horizontal[[j, i]] = edge(grid.point(i, j), grid.point(i + 1, j))?;
            }
        }
    }
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx {
            if mask[[j, i]] && mask[[j + 1, i]] {
                links.vertical[[j, i]] = edge(grid.point(i, j), grid.point(i, j + 1))?;
            }
        }
    }
    Ok(links)
}

/// Link phases on every edge regardless of the mask (for plaquette diagnostics
/// around obstacles).
pub fn build_all_link_phases(field: &GaugeField, grid: &GridSpec) -> Result<LinkPhases, SolverError> {
    let mask = Array2::from_elem(grid.shape(), true);
    build_link_phases_masked(field, grid, &mask)
}
