//! Time stepping.
//!
//! The discrete Hamiltonian is the gauge-covariant five-point operator
//! (Hu)_a = c[4u_a − Σ_b Ū_{ab} u_b] + eV u_a, U_{ab} = exp(i(e/ħc)∫_a^b A·dl),
//! c = ħ²/(2mh²), with inactive nodes held at zero. The default step is the Strang
//! composition V/2 · C_x(dt/2) · C_y(dt) · C_x(dt/2) · V/2 of Cayley factors, each a
//! set of tridiagonal solves along grid lines; all factors are unitary.

use abw_core::{Complex64, Domain, GridField, Vec2};
use abw_gauge::GaugeField;
use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::links::build_link_phases_masked;
use crate::{Boundary, LinkPhases, Scheme, SolverConfig, SolverError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Reusable stepper for a fixed grid, link set and mask.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub config: SolverConfig,
    pub links: LinkPhases,
    pub mask: Array2<bool>,
    /// Damping rate of the absorbing rim at each node.
    rim: Option<Array2<f64>>,
    /// Transposed copies for the column sweep.
    vertical_t: Array2<Complex64>,
    mask_t: Array2<bool>,
}

fn rim_profile(config: &SolverConfig) -> Option<Array2<f64>> {
    let Boundary::DirichletPlusAbsorbingRim { width, strength } = config.boundary else {
        return None;
    };
    let g = config.grid;
    let hi = g.upper_corner();
    Some(Array2::from_shape_fn(g.shape(), |(j, i)| {
        let p = g.point(i, j);
        let d = (p.x1 - g.origin.x1)
            .min(hi.x1 - p.x1)
            .min(p.x2 - g.origin.x2)
            .min(hi.x2 - p.x2);
        let r = (1.0 - d / width).max(0.0);
        strength * r * r
    }))
}

/// Solves the Cayley system along one grid line split into active segments:
/// (1 + iθH)u_new = (1 − iθH)u_old with H = c·tridiag(−U, 2, −Ū).
fn cayley_line(u: &mut [Complex64], links: &[Complex64], mask: &[bool], theta: f64, c: f64, work: &mut Vec<Complex64>) {
    let n = u.len();
    let diag = Complex64::new(1.0, 2.0 * theta * c);
    let off = -I * theta * c;
    let mut start = 0;
    while start < n {
        if !mask[start] {
            u[start] = ZERO;
            start += 1;
            continue;
        }
        let mut end = start;
        while end + 1 < n && mask[end + 1] {
            end += 1;
        }
        let m = end - start + 1;
        // right-hand side
        work.clear();
        work.resize(3 * m, ZERO);
        let (rhs, rest) = work.split_at_mut(m);
        let (cp, dp) = rest.split_at_mut(m);
        for k in 0..m {
            let idx = start + k;
            let mut hu = u[idx] * 2.0;
            if k + 1 < m {
                hu -= links[idx].conj() * u[idx + 1];
            }
            if k > 0 {
                hu -= links[idx - 1] * u[idx - 1];
            }
            rhs[k] = u[idx] - I * theta * c * hu;
        }
        // Thomas: upper(k) = off·Ū_k, lower(k) = off·U_{k−1}
        let upper = |k: usize| off * links[start + k].conj();
        let lower = |k: usize| off * links[start + k - 1];
        cp[0] = if m > 1 { upper(0) / diag } else { ZERO };
        dp[0] = rhs[0] / diag;
        for k in 1..m {
            let l = lower(k);
            let den = diag - l * cp[k - 1];
            cp[k] = if k + 1 < m { upper(k) / den } else { ZERO };
            dp[k] = (rhs[k] - l * dp[k - 1]) / den;
        }
        u[end] = dp[m - 1];
        for k in (0..m - 1).rev() {
            u[start + k] = dp[k] - cp[k] * u[start + k + 1];
        }
        start = end + 1;
    }
}

impl Propagator {
    pub fn new(config: SolverConfig, links: LinkPhases, mask: Array2<bool>) -> Result<Self, SolverError> {
        config.validate()?;
        if mask.dim() != config.grid.shape()
            || links.horizontal.dim() != (config.grid.ny, config.grid.nx - 1)
            || links.vertical.dim() != (config.grid.ny - 1, config.grid.nx)
        {
            return Err(SolverError::MaskMismatch);
        }
        let vertical_t = links.vertical.t().as_standard_layout().into_owned();
        let mask_t = mask.t().as_standard_layout().into_owned();
        Ok(Self {
            rim: rim_profile(&config),
            config,
            links,
            mask,
            vertical_t,
            mask_t,
        })
    }

    /// Replaces the mask (moving domains); link phases are kept.
    pub fn set_mask(&mut self, mask: Array2<bool>) -> Result<(), SolverError> {
        if mask.dim() != self.config.grid.shape() {
            return Err(SolverError::MaskMismatch);
        }
        self.mask_t = mask.t().as_standard_layout().into_owned();
        self.mask = mask;
        Ok(())
    }

    fn kinetic(&self) -> f64 {
        let c = &self.config.constants;
        c.hbar * c.hbar / (2.0 * c.mass * self.config.grid.spacing.powi(2))
    }

    fn check_state(&self, state: &GridField) -> Result<(), SolverError> {
        if state.spec != self.config.grid || state.values.dim() != self.mask.dim() {
            return Err(SolverError::MaskMismatch);
        }
        Ok(())
    }

    /// Applies the discrete Hamiltonian with potential values `ev` (eV at nodes).
    pub fn apply_h(&self, u: &Array2<Complex64>, ev: &Array2<f64>) -> Array2<Complex64> {
        let c = self.kinetic();
        let (ny, nx) = u.dim();
        let (h, v, m) = (&self.links.horizontal, &self.links.vertical, &self.mask);
        let mut out = Array2::zeros((ny, nx));
        out.as_slice_mut().expect("standard layout").par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            for i in 0..nx {
                if !m[[j, i]] {
                    continue;
                }
                let mut acc = u[[j, i]] * (4.0 * c + ev[[j, i]]);
                if i + 1 < nx && m[[j, i + 1]] {
                    acc -= h[[j, i]].conj() * u[[j, i + 1]] * c;
                }
                if i > 0 && m[[j, i - 1]] {
                    acc -= h[[j, i - 1]] * u[[j, i - 1]] * c;
                }
                if j + 1 < ny && m[[j + 1, i]] {
                    acc -= v[[j, i]].conj() * u[[j + 1, i]] * c;
                }
                if j > 0 && m[[j - 1, i]] {
                    acc -= v[[j - 1, i]] * u[[j - 1, i]] * c;
                }
                row[i] = acc;
            }
        });
        out
    }

    fn potential_factor(&self, u: &mut Array2<Complex64>, ev: &Array2<f64>, dt_half: f64) {
        let hbar = self.config.constants.hbar;
        match &self.rim {
            Some(rim) => Zip::from(u).and(ev).and(rim).for_each(|z, &v, &w| {
                *z *= Complex64::from_polar((-w * dt_half).exp(), -v * dt_half / hbar);
            }),
            None => Zip::from(u).and(ev).for_each(|z, &v| {
                if v != 0.0 {
                    *z *= Complex64::from_polar(1.0, -v * dt_half / hbar);
                }
            }),
        }
    }

    fn sweep_lines(u: &mut Array2<Complex64>, links: &Array2<Complex64>, mask: &Array2<bool>, theta: f64, c: f64) {
        let n = u.ncols();
        let u = u.as_slice_mut().expect("standard layout");
        let links = links.as_slice().expect("standard layout");
        let mask = mask.as_slice().expect("standard layout");
        u.par_chunks_mut(n)
            .zip(links.par_chunks(n - 1))
            .zip(mask.par_chunks(n))
            .for_each_init(Vec::new, |work, ((line, lk), mk)| cayley_line(line, lk, mk, theta, c, work));
    }

    fn sweep_x(&self, u: &mut Array2<Complex64>, dt: f64) {
        let theta = dt / (2.0 * self.config.constants.hbar);
        Self::sweep_lines(u, &self.links.horizontal, &self.mask, theta, self.kinetic());
    }

    fn sweep_y(&self, u: &mut Array2<Complex64>, dt: f64) {
        let theta = dt / (2.0 * self.config.constants.hbar);
        let mut ut = u.t().as_standard_layout().into_owned();
        Self::sweep_lines(&mut ut, &self.vertical_t, &self.mask_t, theta, self.kinetic());
        u.assign(&ut.t());
    }

    /// One step of size `dt` with potential values `ev` (eV at the step midpoint).
    pub fn step_with(&self, state: &mut GridField, ev: &Array2<f64>, dt: f64) -> Result<(), SolverError> {
        self.check_state(state)?;
        let u = &mut state.values;
        Zip::from(&mut *u).and(&self.mask).for_each(|z, &m| {
            if !m {
                *z = ZERO;
            }
        });
        match self.config.scheme {
            Scheme::Adi => {
                self.potential_factor(u, ev, 0.5 * dt);
                self.sweep_x(u, 0.5 * dt);
                self.sweep_y(u, dt);
                self.sweep_x(u, 0.5 * dt);
                self.potential_factor(u, ev, 0.5 * dt);
            }
            Scheme::CrankNicolson => {
                let zero = Array2::zeros(ev.dim());
                if self.rim.is_some() {
                    self.potential_factor(u, &zero, 0.5 * dt);
                }
                let new = self.cn_solve(u, ev, dt)?;
                *u = new;
                if self.rim.is_some() {
                    self.potential_factor(u, &zero, 0.5 * dt);
                }
            }
        }
        state.mask.assign(&self.mask);
        Ok(())
    }

    fn cn_solve(&self, u: &Array2<Complex64>, ev: &Array2<f64>, dt: f64) -> Result<Array2<Complex64>, SolverError> {
        let theta = dt / (2.0 * self.config.constants.hbar);
        let c = self.kinetic();
        let apply = |x: &Array2<Complex64>, sign: f64| -> Array2<Complex64> {
            let hx = self.apply_h(x, ev);
            let mut out = x.clone();
            Zip::from(&mut out).and(&hx).for_each(|o, &h| *o += I * (sign * theta) * h);
            out
        };
        let b = apply(u, -1.0);
        let diag = ev.mapv(|v| Complex64::new(1.0, theta * (4.0 * c + v)));
        bicgstab(|x| apply(x, 1.0), &diag, &b, u.clone(), self.config.tolerance, self.config.max_iterations)
    }

    /// Potential eV(x) at time t sampled on the grid.
    pub fn sample_potential(&self, potential: &(dyn Fn(Vec2, f64) -> f64 + Sync), t: f64) -> Array2<f64> {
        let g = self.config.grid;
        let e = self.config.constants.charge;
        Array2::from_shape_fn(g.shape(), |(j, i)| e * potential(g.point(i, j), t))
    }
}

fn dot(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    Zip::from(a).and(b).fold(ZERO, |acc, x, y| acc + x.conj() * y)
}

fn norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Jacobi-preconditioned BiCGSTAB.
fn bicgstab<F>(
    a: F,
    diag: &Array2<Complex64>,
    b: &Array2<Complex64>,
    x0: Array2<Complex64>,
    tol: f64,
    max_iter: usize,
) -> Result<Array2<Complex64>, SolverError>
where
    F: Fn(&Array2<Complex64>) -> Array2<Complex64>,
{
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(Array2::zeros(b.dim()));
    }
    let precond = |r: &Array2<Complex64>| {
        let mut z = r.clone();
        Zip::from(&mut z).and(diag).for_each(|z, &d| *z /= d);
        z
    };
    let mut x = x0;
    let mut r = b - &a(&x);
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = Array2::zeros(b.dim());
    let mut p = Array2::zeros(b.dim());
    let mut res = norm(&r) / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(x);
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            return Err(SolverError::LinearSolveFailure { iterations: it, residual: res });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        Zip::from(&mut p).and(&r).and(&v).for_each(|p, &r, &v| *p = r + beta * (*p - omega * v));
        let y = precond(&p);
        v = a(&y);
        alpha = rho / dot(&r_hat, &v);
        let s = &r - &(&v * alpha);
        if norm(&s) / bnorm <= tol {
            x.scaled_add(alpha, &y);
            return Ok(x);
        }
        let z = precond(&s);
        let t = a(&z);
        omega = dot(&t, &s) / dot(&t, &t);
        x.scaled_add(alpha, &y);
        x.scaled_add(omega, &z);
        r = &s - &(&t * omega);
        res = norm(&r) / bnorm;
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(SolverError::LinearSolveFailure {
            iterations: max_iter,
            residual: res,
        })
    }
}

/// One step of `state` under `links` and a static potential (in volts, per unit
/// charge).
pub fn step(
    state: &mut GridField,
    links: &LinkPhases,
    potential: &(dyn Fn(Vec2) -> f64 + Sync),
    config: &SolverConfig,
) -> Result<(), SolverError> {
    let prop = Propagator::new(*config, links.clone(), state.mask.clone())?;
    let ev = prop.sample_potential(&|x, _| potential(x), 0.0);
    prop.step_with(state, &ev, config.dt)
}

/// Step sizes that land exactly on each target time.
pub(crate) fn schedule(t0: f64, targets: &[f64], dt: f64) -> Result<Vec<(f64, f64, Option<usize>)>, SolverError> {
    let mut out = Vec::new();
    let mut t = t0;
    for (k, &target) in targets.iter().enumerate() {
        if !(target >= t - 1e-12) || !target.is_finite() {
            return Err(SolverError::BadSnapshotTime(target));
        }
        let span = target - t;
        let n = (span / dt - 1e-9).ceil().max(0.0) as usize;
        if n == 0 {
            out.push((t, 0.0, Some(k)));
            continue;
        }
        let h = span / n as f64;
        for s in 0..n {
            let last = s + 1 == n;
            out.push((t + s as f64 * h, h, last.then_some(k)));
        }
        t = target;
    }
    Ok(out)
}

/// Evolves with fixed links and mask, potential `potential(x, t)` sampled at step
/// midpoints, returning a snapshot at each requested time.
pub fn evolve_with_links(
    initial: &GridField,
    links: LinkPhases,
    potential: &(dyn Fn(Vec2, f64) -> f64 + Sync),
    config: &SolverConfig,
    t0: f64,
    snapshot_times: &[f64],
) -> Result<Vec<GridField>, SolverError> {
    run_fixed(initial, links, potential, config, t0, snapshot_times, true)
}

fn run_fixed(
    initial: &GridField,
    links: LinkPhases,
    potential: &(dyn Fn(Vec2, f64) -> f64 + Sync),
    config: &SolverConfig,
    t0: f64,
    snapshot_times: &[f64],
    time_dependent: bool,
) -> Result<Vec<GridField>, SolverError> {
    let prop = Propagator::new(*config, links, initial.mask.clone())?;
    let mut state = initial.clone();
    state.enforce_mask();
    let mut out = Vec::with_capacity(snapshot_times.len());
    let mut ev = prop.sample_potential(potential, t0);
    for (t, h, snap) in schedule(t0, snapshot_times, config.dt)? {
        if h > 0.0 {
            if time_dependent {
                ev = prop.sample_potential(potential, t + 0.5 * h);
            }
            prop.step_with(&mut state, &ev, h)?;
        }
        if snap.is_some() {
            out.push(state.clone());
        }
    }
    Ok(out)
}

/// Evolves `initial` under `field` on `domain` and returns snapshots (the final
/// state if `snapshot_times` is empty).
pub fn evolve(
    initial: &GridField,
    field: &GaugeField,
    domain: &Domain,
    t_final: f64,
    config: &SolverConfig,
    snapshot_times: &[f64],
) -> Result<Vec<GridField>, SolverError> {
    config.validate()?;
    if initial.spec != config.grid {
        return Err(SolverError::MaskMismatch);
    }
    let mask = config.grid.domain_mask(domain);
    let mut start = initial.clone();
    start.mask = mask.clone();
    start.enforce_mask();
    let links = build_link_phases_masked(field, &config.grid, &mask)?;
    let times: Vec<f64> = if snapshot_times.is_empty() { vec![t_final] } else { snapshot_times.to_vec() };
    if times.iter().any(|&t| t > t_final + 1e-12) {
        return Err(SolverError::BadSnapshotTime(t_final));
    }
    let pot = |x: Vec2, t: f64| field.scalar(x, t);
    let time_dependent = field.scalar_potential.uniform_value().is_none();
    run_fixed(&start, links, &pot, config, 0.0, &times, time_dependent)
}
