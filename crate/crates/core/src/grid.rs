//! Rectangular grids and masked complex fields. Arrays are stored with shape
//! `(ny, nx)`; cell `(i, j)` sits at `origin + (i·h, j·h)`.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{signed_distance, Domain};
use crate::{CoreError, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Vec2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Vec2, spacing: f64, nx: usize, ny: usize) -> Result<Self, CoreError> {
        let s = Self {
            origin,
            spacing,
            nx,
            ny,
        };
        s.validate()?;
        Ok(s)
    }

    /// Grid covering `[lo, hi]` with the given spacing (hi rounded outward).
    pub fn covering(lo: Vec2, hi: Vec2, spacing: f64) -> Result<Self, CoreError> {
        let nx = ((hi.x1 - lo.x1) / spacing).ceil() as usize + 1;
        let ny = ((hi.x2 - lo.x2) / spacing).ceil() as usize + 1;
        Self::new(lo, spacing, nx, ny)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(CoreError::InvalidGrid(format!("spacing must be positive, got {}", self.spacing)));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(CoreError::InvalidGrid(format!("need nx, ny >= 2, got {}x{}", self.nx, self.ny)));
        }
        if !self.origin.is_finite() {
            return Err(CoreError::InvalidGrid("non-finite origin".into()));
        }
        Ok(())
    }

    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn upper_corner(&self) -> Vec2 {
        self.point(self.nx - 1, self.ny - 1)
    }

    /// Cell area h².
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Nearest grid indices to `p`, if inside the grid.
    pub fn nearest(&self, p: Vec2) -> Option<(usize, usize)> {
        let fi = ((p.x1 - self.origin.x1) / self.spacing).round();
        let fj = ((p.x2 - self.origin.x2) / self.spacing).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            None
        } else {
            Some((fi as usize, fj as usize))
        }
    }

    /// Mask of cells strictly outside every obstacle and strictly inside the box.
    pub fn domain_mask(&self, domain: &Domain) -> Array2<bool> {
        Array2::from_shape_fn(self.shape(), |(j, i)| {
            let p = self.point(i, j);
            domain.in_bounding_box(p) && signed_distance(domain, p) > 0.0
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Array2<Complex64>,
    pub mask: Array2<bool>,
}

impl GridField {
    pub fn zeros(spec: GridSpec, mask: Array2<bool>) -> Result<Self, CoreError> {
        if mask.dim() != spec.shape() {
            return Err(CoreError::InvalidGrid(format!(
                "mask shape {:?} does not match grid {:?}",
                mask.dim(),
                spec.shape()
            )));
        }
        Ok(Self {
            values: Array2::zeros(spec.shape()),
            spec,
            mask,
        })
    }

    /// Field with every cell active.
    pub fn unmasked(spec: GridSpec) -> Self {
        Self {
            values: Array2::zeros(spec.shape()),
            mask: Array2::from_elem(spec.shape(), true),
            spec,
        }
    }

    pub fn for_domain(spec: GridSpec, domain: &Domain) -> Self {
        let mask = spec.domain_mask(domain);
        Self {
            values: Array2::zeros(spec.shape()),
            spec,
            mask,
        }
    }

    /// Samples `f` at active cells; inactive cells are set to 0.
    pub fn fill_with(&mut self, f: impl Fn(Vec2) -> Complex64 + Sync) {
        let spec = self.spec;
        Zip::indexed(&mut self.values)
            .and(&self.mask)
            .for_each(|(j, i), v, &m| {
                *v = if m { f(spec.point(i, j)) } else { Complex64::new(0.0, 0.0) };
            });
    }

    pub fn from_fn(spec: GridSpec, mask: Array2<bool>, f: impl Fn(Vec2) -> Complex64 + Sync) -> Result<Self, CoreError> {
        let mut g = Self::zeros(spec, mask)?;
        g.fill_with(f);
        Ok(g)
    }

    /// Zeroes inactive cells.
    pub fn enforce_mask(&mut self) {
        Zip::from(&mut self.values).and(&self.mask).for_each(|v, &m| {
            if !m {
                *v = Complex64::new(0.0, 0.0);
            }
        });
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[[j, i]]
    }

    /// h² Σ |u|².
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spec.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// h² Σ conj(u) v.
    pub fn inner(&self, other: &GridField) -> Complex64 {
        Zip::from(&self.values)
            .and(&other.values)
            .fold(Complex64::new(0.0, 0.0), |acc, a, b| acc + a.conj() * b)
            * self.spec.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, p: Vec2) -> Option<Complex64> {
        let h = self.spec.spacing;
        let fx = (p.x1 - self.spec.origin.x1) / h;
        let fy = (p.x2 - self.spec.origin.x2) / h;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (self.spec.nx - 1) as f64 && fy <= (self.spec.ny - 1) as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.spec.nx - 2);
        let j = (fy.floor() as usize).min(self.spec.ny - 2);
        let (a, b) = (fx - i as f64, fy - j as f64);
        let v = &self.values;
        Some(
            v[[j, i]] * ((1.0 - a) * (1.0 - b))
                + v[[j, i + 1]] * (a * (1.0 - b))
                + v[[j + 1, i]] * ((1.0 - a) * b)
                + v[[j + 1, i + 1]] * (a * b),
        )
    }

    /// Pointwise difference; specs must agree.
    pub fn sub(&self, other: &GridField) -> Result<GridField, CoreError> {
        if self.spec != other.spec {
            return Err(CoreError::InvalidGrid("grid specs differ".into()));
        }
        Ok(GridField {
            spec: self.spec,
            values: &self.values - &other.values,
            mask: Zip::from(&self.mask).and(&other.mask).map_collect(|&a, &b| a || b),
        })
    }

    pub fn density(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;

    #[test]
    fn mask_matches_signed_distance() {
        let domain = Domain::new(
            vec![Obstacle::disk("d", Vec2::ZERO, 1.0).unwrap()],
            (Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0)),
        )
        .unwrap();
        let spec = GridSpec::new(Vec2::new(-2.0, -2.0), 0.1, 41, 41).unwrap();
        let g = GridField::for_domain(spec, &domain);
        assert!(!g.mask[[20, 20]]);
        assert!(!g.mask[[0, 5]]);
        assert!(g.mask[[20, 2]]);
        for ((j, i), &m) in g.mask.indexed_iter() {
            let p = spec.point(i, j);
            assert_eq!(m, domain.in_bounding_box(p) && signed_distance(&domain, p) > 0.0);
        }
    }

    #[test]
    fn norm_and_interpolation() {
        let spec = GridSpec::new(Vec2::ZERO, 0.5, 5, 3).unwrap();
        let mut g = GridField::unmasked(spec);
        g.fill_with(|p| Complex64::new(p.x1 + 2.0 * p.x2, 0.0));
        let v = g.interpolate(Vec2::new(0.7, 0.3)).unwrap();
        assert!((v.re - 1.3).abs() < 1e-14);
        assert!(g.interpolate(Vec2::new(3.0, 0.0)).is_none());
        let mut h = GridField::unmasked(spec);
        h.fill_with(|_| Complex64::new(0.0, 1.0));
        assert!((h.norm_sq() - 15.0 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn bad_specs() {
        assert!(GridSpec::new(Vec2::ZERO, 0.0, 4, 4).is_err());
        assert!(GridSpec::new(Vec2::ZERO, 0.1, 1, 4).is_err());
    }
}
