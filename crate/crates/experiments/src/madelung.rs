//! Modulus–phase split v = R e^{iΦ} of solver output and the finite-difference
//! residuals of the transport and Hamilton–Jacobi equations (field-free).

use std::collections::VecDeque;

use abw_core::{GridField, PhysicalConstants, Vec2};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::common::wrap_phase;
use crate::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MadelungOptions {
    /// Cells below threshold · max|v| are excluded.
    pub threshold: f64,
    /// Optional evaluation rectangle (lo, hi).
    pub region: Option<(Vec2, Vec2)>,
}

impl Default for MadelungOptions {
    fn default() -> Self {
        Self {
            threshold: 1e-3,
            region: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MadelungDecomposition {
    /// Time-midpoint modulus.
    pub r: Array2<f64>,
    /// Time-midpoint unwrapped phase; meaningful where `valid`.
    pub phi: Array2<f64>,
    pub valid: Array2<bool>,
    /// ‖ħR_t + (ħ²/2m)(2∇R·∇Φ + RΔΦ)‖₂.
    pub residual_transport: f64,
    /// ‖ħΦ_tR − (ħ²/2m)(ΔR − R|∇Φ|²)‖₂.
    pub residual_hj: f64,
    pub evaluated_cells: usize,
}

/// Flood fill from the largest-modulus cell; neighbours differ by the wrapped increment.
fn unwrap_phase(v: &GridField, valid: &Array2<bool>) -> Array2<f64> {
    let (ny, nx) = valid.dim();
    let mut phi = Array2::from_elem((ny, nx), f64::NAN);
    let mut best = None;
    let mut best_mod = 0.0;
    for ((j, i), z) in v.values.indexed_iter() {
        if valid[[j, i]] && z.norm() > best_mod {
            best_mod = z.norm();
            best = Some((j, i));
        }
    }
    let Some(seed) = best else {
        return phi;
    };
    phi[seed] = v.values[seed].arg();
    let mut queue = VecDeque::from([seed]);
    while let Some((j, i)) = queue.pop_front() {
        let base = phi[[j, i]];
        let nbrs = [
            (j, i.wrapping_sub(1)),
            (j, i + 1),
            (j.wrapping_sub(1), i),
            (j + 1, i),
        ];
        for (jj, ii) in nbrs {
            if jj < ny && ii < nx && valid[[jj, ii]] && phi[[jj, ii]].is_nan() {
                phi[[jj, ii]] = base + wrap_phase(v.values[[jj, ii]].arg() - base);
                queue.push_back((jj, ii));
            }
        }
    }
    phi
}

/// Decomposes the pair (v(t), v(t + dt)) and evaluates both residuals at the time
/// midpoint with centred differences. Cells count when they and their four
/// neighbours are above threshold.
pub fn madelung_residual(
    first: &GridField,
    second: &GridField,
    dt: f64,
    constants: &PhysicalConstants,
    options: &MadelungOptions,
) -> Result<MadelungDecomposition, ExperimentError> {
    if first.spec != second.spec {
        return Err(ExperimentError::InvalidSpec("snapshot grids differ".into()));
    }
    if !(dt > 0.0) {
        return Err(ExperimentError::InvalidSpec(format!("dt must be positive, got {dt}")));
    }
    let grid = first.spec;
    let (ny, nx) = grid.shape().into();
    let in_region = |i: usize, j: usize| match options.region {
        Some((lo, hi)) => {
            let p = grid.point(i, j);
            p.x1 >= lo.x1 && p.x1 <= hi.x1 && p.x2 >= lo.x2 && p.x2 <= hi.x2
        }
        None => true,
    };
    let vmax = first.max_abs().max(second.max_abs());
    let cut = options.threshold * vmax;
    let above = Array2::from_shape_fn((ny, nx), |(j, i)| {
        first.mask[[j, i]] && first.values[[j, i]].norm() > cut && second.values[[j, i]].norm() > cut
    });
    let mut region_cells = 0usize;
    let mut vanishing = 0usize;
    for j in 0..ny {
        for i in 0..nx {
            if first.mask[[j, i]] && in_region(i, j) {
                region_cells += 1;
                if !above[[j, i]] {
                    vanishing += 1;
                }
            }
        }
    }
    if region_cells == 0 {
        return Err(ExperimentError::InvalidSpec("empty evaluation set".into()));
    }
    let fraction = vanishing as f64 / region_cells as f64;
    if fraction > 0.5 {
        return Err(ExperimentError::VanishingModulus { fraction });
    }
    let phi1 = unwrap_phase(first, &above);
    let phi2 = Array2::from_shape_fn((ny, nx), |(j, i)| {
        if above[[j, i]] {
            phi1[[j, i]] + (second.values[[j, i]] / first.values[[j, i]]).arg()
        } else {
            f64::NAN
        }
    });
    let r1 = first.values.mapv(|z| z.norm());
    let r2 = second.values.mapv(|z| z.norm());
    let r = (&r1 + &r2) * 0.5;
    let phi = (&phi1 + &phi2) * 0.5;
    let valid = Array2::from_shape_fn((ny, nx), |(j, i)| above[[j, i]] && !phi1[[j, i]].is_nan());
    let (hbar, m) = (constants.hbar, constants.mass);
    let kin = hbar * hbar / (2.0 * m);
    let h = grid.spacing;
    let (mut st, mut sh, mut count) = (0.0, 0.0, 0usize);
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            let cells = [(j, i), (j, i - 1), (j, i + 1), (j - 1, i), (j + 1, i)];
            if !in_region(i, j) || cells.iter().any(|&c| !valid[c]) {
                continue;
            }
            let grad = |f: &Array2<f64>| Vec2::new((f[[j, i + 1]] - f[[j, i - 1]]) / (2.0 * h), (f[[j + 1, i]] - f[[j - 1, i]]) / (2.0 * h));
            let lap = |f: &Array2<f64>| (f[[j, i + 1]] + f[[j, i - 1]] + f[[j + 1, i]] + f[[j - 1, i]] - 4.0 * f[[j, i]]) / (h * h);
            let (gr, gp) = (grad(&r), grad(&phi));
            let rt = (r2[[j, i]] - r1[[j, i]]) / dt;
            let pt = (phi2[[j, i]] - phi1[[j, i]]) / dt;
            let rc = r[[j, i]];
            let transport = hbar * rt + kin * (2.0 * gr.dot(gp) + rc * lap(&phi));
            let hj = hbar * pt * rc - kin * (lap(&r) - rc * gp.norm_sq());
            st += transport * transport;
            sh += hj * hj;
            count += 1;
        }
    }
    let area = grid.cell_area();
    Ok(MadelungDecomposition {
        r,
        phi,
        valid,
        residual_transport: (st * area).sqrt(),
        residual_hj: (sh * area).sqrt(),
        evaluated_cells: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use abw_core::{Complex64, GridSpec};

    fn plane(grid: GridSpec, k: Vec2, t: f64, c: Complex64) -> GridField {
        let w = 0.5 * k.norm_sq();
        GridField::from_fn(grid, Array2::from_elem(grid.shape(), true), |x| c * Complex64::from_polar(1.0, k.dot(x) - w * t)).unwrap()
    }

    #[test]
    fn plane_wave_is_exact() {
        let grid = GridSpec::new(Vec2::new(-1.0, -1.0), 0.05, 41, 41).unwrap();
        let k = Vec2::new(3.0, -1.5);
        let one = Complex64::new(1.0, 0.0);
        let d = madelung_residual(&plane(grid, k, 0.0, one), &plane(grid, k, 0.01, one), 0.01, &PhysicalConstants::default(), &MadelungOptions::default()).unwrap();
        assert!(d.residual_transport < 1e-10 && d.residual_hj < 1e-9, "{} {}", d.residual_transport, d.residual_hj);
        assert_eq!(d.evaluated_cells, 39 * 39);
    }

    #[test]
    fn constant_phase_leaves_residuals() {
        let grid = GridSpec::new(Vec2::new(-1.0, -1.0), 0.05, 41, 41).unwrap();
        let f = |t: f64, c: Complex64| {
            GridField::from_fn(grid, Array2::from_elem(grid.shape(), true), |x| {
                c * Complex64::from_polar((-(x.norm_sq()) * (1.0 + t)).exp(), 2.0 * x.x1 + x.x2 * x.x2 - t)
            })
            .unwrap()
        };
        let opts = MadelungOptions::default();
        let c = PhysicalConstants::default();
        let one = Complex64::new(1.0, 0.0);
        let rot = Complex64::from_polar(1.0, 2.3);
        let a = madelung_residual(&f(0.0, one), &f(0.01, one), 0.01, &c, &opts).unwrap();
        let b = madelung_residual(&f(0.0, rot), &f(0.01, rot), 0.01, &c, &opts).unwrap();
        assert!((a.residual_transport - b.residual_transport).abs() <= 1e-9 * a.residual_transport.max(1e-12));
        assert!((a.residual_hj - b.residual_hj).abs() <= 1e-9 * a.residual_hj.max(1e-12));
    }

    #[test]
    fn vanishing_modulus_is_flagged() {
        let grid = GridSpec::new(Vec2::new(-1.0, -1.0), 0.05, 41, 41).unwrap();
        let f = GridField::from_fn(grid, Array2::from_elem(grid.shape(), true), |x| {
            Complex64::new(if x.x1 > 0.5 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let e = madelung_residual(&f, &f, 0.01, &PhysicalConstants::default(), &MadelungOptions::default()).unwrap_err();
        assert!(matches!(e, ExperimentError::VanishingModulus { .. }));
    }
}
