//! Transported amplitudes on the characteristic grid.
//!
//! With a_n = e^{iΛ} c_n and Λ the flux phase from x − tω to x, the transport
//! equations become ħ∂_t c_n = P̂ c_{n−1} at fixed characteristic coordinates
//! (s, τ), where
//!
//! P̂ = (ħ²/2m)[∂_t² − 2∂_t D_s − D_τ²] + eV,  D = ∇ − iβ,  β = (e/ħc)A(x₀ + sω + τω⊥).
//!
//! Each c_n is a polynomial of degree n in t whose coefficients Q_{n,j}(s, τ) are
//! stored on the grid. With an initial gauge factor g = e^{iΦ} the tables are
//! built for β − ∇Φ (the reference gauge); callers multiply by g(y), which keeps
//! the discrete amplitudes exactly covariant.

use abw_core::mollifier_eval;
use abw_core::{Complex64, Vec2};
use abw_gauge::{GaugeField, GaugeTransform};
use ndarray::{Array2, Zip};

use crate::{BeamError, BeamSpec, TableResolution};

const I: Complex64 = Complex64::new(0.0, 1.0);
const MARGIN: usize = 10;

#[derive(Debug, Clone)]
pub struct TransportTables {
    pub s0: f64,
    pub hs: f64,
    pub tau0: f64,
    pub htau: f64,
    /// β·ω and β·ω⊥ on the grid.
    beta_w: Array2<f64>,
    beta_p: Array2<f64>,
    dtau_beta_p: Array2<f64>,
    /// q[n][j] = Q_{n,j}; array index [s, τ].
    q: Vec<Vec<Array2<Complex64>>>,
    hbar: f64,
    mass: f64,
    ev: f64,
}

fn shape_of(a: &Array2<Complex64>) -> (usize, usize) {
    let s = a.shape();
    (s[0], s[1])
}

/// Fourth-order first derivative along `axis` with stencil spacing `stride` cells.
fn d1(a: &Array2<Complex64>, axis: usize, h: f64, stride: usize) -> Array2<Complex64> {
    let (n0, n1) = shape_of(a);
    let hh = h * stride as f64;
    let st = stride as isize;
    Array2::from_shape_fn((n0, n1), |(i, j)| {
        let at = |o: isize| -> Complex64 {
            let (ii, jj) = if axis == 0 { (i as isize + o, j as isize) } else { (i as isize, j as isize + o) };
            if ii < 0 || jj < 0 || ii >= n0 as isize || jj >= n1 as isize {
                Complex64::new(0.0, 0.0)
            } else {
                a[[ii as usize, jj as usize]]
            }
        };
        (-at(2 * st) + at(st) * 8.0 - at(-st) * 8.0 + at(-2 * st)) / (12.0 * hh)
    })
}

fn d2(a: &Array2<Complex64>, axis: usize, h: f64, stride: usize) -> Array2<Complex64> {
    let (n0, n1) = shape_of(a);
    let hh = h * stride as f64;
    let st = stride as isize;
    Array2::from_shape_fn((n0, n1), |(i, j)| {
        let at = |o: isize| -> Complex64 {
            let (ii, jj) = if axis == 0 { (i as isize + o, j as isize) } else { (i as isize, j as isize + o) };
            if ii < 0 || jj < 0 || ii >= n0 as isize || jj >= n1 as isize {
                Complex64::new(0.0, 0.0)
            } else {
                a[[ii as usize, jj as usize]]
            }
        };
        (-at(2 * st) + at(st) * 16.0 - at(0) * 30.0 + at(-st) * 16.0 - at(-2 * st)) / (12.0 * hh * hh)
    })
}

/// Cubic Lagrange weights for fractional offset f ∈ [0,1) on nodes −1, 0, 1, 2.
fn cubic_weights(f: f64) -> [f64; 4] {
    [
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ]
}

impl TransportTables {
    pub fn build(
        spec: &BeamSpec,
        field: &GaugeField,
        initial_gauge: Option<&GaugeTransform>,
        res: &TableResolution,
    ) -> Result<Self, BeamError> {
        if spec.order > 0 && field.scalar_potential.uniform_value().is_none() {
            return Err(BeamError::UnsupportedPotential(spec.order));
        }
        let c = &spec.constants;
        let omega = spec.direction;
        let perp = omega.perp();
        let d1w = spec.delta1;
        let d2k = spec.longitudinal_width();

        let htau = 2.0 * d1w / (res.n_tau.max(8) - 1) as f64;
        // distance from the flux centers to the strip sets the scale of β
        let mut clearance = f64::INFINITY;
        for term in &field.flux_terms {
            let r = term.center - spec.base_point;
            let ds = (r.dot(omega).abs() - d2k).max(0.0);
            let dt = (r.dot(perp).abs() - d1w).max(0.0);
            clearance = clearance.min(ds.hypot(dt).max(htau));
        }
        let mut hs = (d2k / 64.0).min(res.max_hs).min(clearance / 12.0);
        let max_ns = 40_000;
        if 2.0 * d2k / hs > max_ns as f64 {
            hs = 2.0 * d2k / max_ns as f64;
        }
        let ns = (2.0 * d2k / hs).ceil() as usize + 1 + 2 * MARGIN;
        let ntau = res.n_tau.max(8) + 2 * MARGIN;
        let s0 = -d2k - MARGIN as f64 * hs;
        let tau0 = -d1w - MARGIN as f64 * htau;
        let point = |i: usize, j: usize| -> Vec2 {
            spec.base_point + omega * (s0 + i as f64 * hs) + perp * (tau0 + j as f64 * htau)
        };

        let coupling = c.flux_coupling();
        let mut beta_w = Array2::zeros((ns, ntau));
        let mut beta_p = Array2::zeros((ns, ntau));
        let mut err = None;
        Zip::indexed(&mut beta_w).and(&mut beta_p).for_each(|(i, j), bw, bp| {
            let y = point(i, j);
            let grad = match initial_gauge {
                Some(g) => g.phase_gradient(field, y),
                None => Ok(Vec2::ZERO),
            };
            match (field.vector_potential(y), grad) {
                (Ok(a), Ok(gr)) => {
                    let b = a * coupling - gr;
                    *bw = b.dot(omega);
                    *bp = b.dot(perp);
                }
                _ => err = Some(BeamError::SourceSingularity { x1: y.x1, x2: y.x2 }),
            }
        });
        if let Some(e) = err {
            if spec.order > 0 {
                return Err(e);
            }
        }
        let bpc = beta_p.mapv(|v: f64| Complex64::new(v, 0.0));
        let dtau_beta_p = d1(&bpc, 1, htau, 1).mapv(|z| z.re);

        let q0 = Array2::from_shape_fn((ns, ntau), |(i, j)| {
            let s = s0 + i as f64 * hs;
            let tau = tau0 + j as f64 * htau;
            Complex64::new(0.5 * mollifier_eval(tau / d1w) * mollifier_eval(s / d2k), 0.0)
        });

        let ev = c.charge * field.scalar_potential.uniform_value().unwrap_or(0.0);
        let mut tables = Self {
            s0,
            hs,
            tau0,
            htau,
            beta_w,
            beta_p,
            dtau_beta_p,
            q: vec![vec![q0]],
            hbar: c.hbar,
            mass: c.mass,
            ev,
        };
        for n in 1..=spec.order {
            let prev = tables.q[n - 1].clone();
            let mut row = vec![Array2::zeros((ns, ntau))];
            for j in 0..n {
                let r = tables.apply_p_hat(&prev, j, 1);
                row.push(r / Complex64::new(c.hbar * (j + 1) as f64, 0.0));
            }
            tables.q.push(row);
        }
        Ok(tables)
    }

    pub fn order(&self) -> usize {
        self.q.len() - 1
    }

    fn d_s(&self, a: &Array2<Complex64>, stride: usize) -> Array2<Complex64> {
        let mut out = d1(a, 0, self.hs, stride);
        Zip::from(&mut out).and(a).and(&self.beta_w).for_each(|o, &v, &b| *o -= I * b * v);
        out
    }

    fn d_tau2(&self, a: &Array2<Complex64>, stride: usize) -> Array2<Complex64> {
        let mut out = d2(a, 1, self.htau, stride);
        let dt = d1(a, 1, self.htau, stride);
        Zip::from(&mut out)
            .and(a)
            .and(&dt)
            .and(&self.beta_p)
            .and(&self.dtau_beta_p)
            .for_each(|o, &v, &dv, &b, &db| {
                *o += -2.0 * I * b * dv - I * db * v - b * b * v;
            });
        out
    }

    /// Coefficient of t^j in P̂ applied to Σ_j t^j p[j].
    fn apply_p_hat(&self, p: &[Array2<Complex64>], j: usize, stride: usize) -> Array2<Complex64> {
        let kin = self.hbar * self.hbar / (2.0 * self.mass);
        let shape = p[0].raw_dim();
        let mut out = Array2::<Complex64>::zeros(shape);
        if let Some(q2) = p.get(j + 2) {
            out.scaled_add(Complex64::new(kin * ((j + 2) * (j + 1)) as f64, 0.0), q2);
        }
        if let Some(q1) = p.get(j + 1) {
            let ds = self.d_s(q1, stride);
            out.scaled_add(Complex64::new(-2.0 * kin * (j + 1) as f64, 0.0), &ds);
        }
        if let Some(q0) = p.get(j) {
            let dt2 = self.d_tau2(q0, stride);
            out.scaled_add(Complex64::new(-kin, 0.0), &dt2);
            out.scaled_add(Complex64::new(self.ev, 0.0), q0);
        }
        out
    }

    /// Coefficients ρ_j of the conjugated residual P̂A − ikħ∂_tA for
    /// A = Σ_n c_n/(ik)^n. Uses the build stencil, so the lower orders cancel
    /// algebraically and ρ reduces to P̂c_N/(ik)^N up to discretization error.
    pub fn residual_coefficients(&self, k: f64) -> Vec<Array2<Complex64>> {
        let big_n = self.order();
        let ik = Complex64::new(0.0, k);
        let shape = self.q[0][0].raw_dim();
        let mut a: Vec<Array2<Complex64>> = vec![Array2::zeros(shape.clone()); big_n + 1];
        for (n, row) in self.q.iter().enumerate() {
            let f = ik.powi(-(n as i32));
            for (j, qj) in row.iter().enumerate() {
                a[j].scaled_add(f, qj);
            }
        }
        (0..=big_n)
            .map(|j| {
                let mut r = self.apply_p_hat(&a, j, 1);
                if let Some(next) = a.get(j + 1) {
                    r.scaled_add(-ik * self.hbar * (j + 1) as f64, next);
                }
                r
            })
            .collect()
    }

    fn interp_array(&self, a: &Array2<Complex64>, s: f64, tau: f64) -> Complex64 {
        let (n0, n1) = shape_of(a);
        let fs = (s - self.s0) / self.hs;
        let ft = (tau - self.tau0) / self.htau;
        if !(fs >= 1.0 && ft >= 1.0 && fs < (n0 - 2) as f64 && ft < (n1 - 2) as f64) {
            return Complex64::new(0.0, 0.0);
        }
        let (is, it) = (fs.floor() as usize, ft.floor() as usize);
        let ws = cubic_weights(fs - is as f64);
        let wt = cubic_weights(ft - it as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a_i, wsi) in ws.iter().enumerate() {
            let row = is + a_i - 1;
            let mut inner = Complex64::new(0.0, 0.0);
            for (b_j, wtj) in wt.iter().enumerate() {
                inner += a[[row, it + b_j - 1]] * *wtj;
            }
            acc += inner * *wsi;
        }
        acc
    }

    /// c_n(s, τ, t) = Σ_j t^j Q_{n,j}(s, τ).
    pub fn c(&self, n: usize, s: f64, tau: f64, t: f64) -> Complex64 {
        self.eval_poly(&self.q[n], s, tau, t)
    }

    /// Σ_j t^j coeffs[j](s, τ) for an arbitrary list of grid coefficients.
    pub fn eval_poly(&self, coeffs: &[Array2<Complex64>], s: f64, tau: f64, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut tp = 1.0;
        for q in coeffs {
            acc += self.interp_array(q, s, tau) * tp;
            tp *= t;
        }
        acc
    }

    /// Raw table Q_{n,j} (reference gauge).
    pub fn coefficient(&self, n: usize, j: usize) -> &Array2<Complex64> {
        &self.q[n][j]
    }

    /// Grid point of node (i, j) in characteristic coordinates.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.s0 + i as f64 * self.hs, self.tau0 + j as f64 * self.htau)
    }
}
