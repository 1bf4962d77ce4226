//! Kannai transform u(x,t) = e^{−iπ/4}√(m/2πħt) ∫ e^{imx₀²/2ħt} w(x,x₀) dx₀.

use std::f64::consts::PI;

use abw_core::quadrature::gauss_legendre;
use abw_core::{mollifier_eval, Complex64, PhysicalConstants};

use crate::BeamError;

/// Regularization parameters tried by [`kannai_limit`].
pub const EPSILON_SEQUENCE: [f64; 3] = [0.1, 0.05, 0.025];

const PANEL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KannaiOptions {
    /// Interval outside which w vanishes, if known.
    pub support: Option<(f64, f64)>,
    /// Bound on the angular frequency of w in x₀.
    pub carrier: f64,
    /// Nodes per local wavelength.
    pub points_per_wavelength: f64,
    /// Largest panel, for resolving the amplitude of w.
    pub max_panel: f64,
}

impl Default for KannaiOptions {
    fn default() -> Self {
        Self {
            support: None,
            carrier: 0.0,
            points_per_wavelength: 12.0,
            max_panel: 0.5,
        }
    }
}

/// Prefactor e^{−iπ/4}√(m/(2πħt)).
pub fn kannai_prefactor(constants: &PhysicalConstants, t: f64) -> Complex64 {
    Complex64::from_polar((constants.mass / (2.0 * PI * constants.hbar * t)).sqrt(), -PI / 4.0)
}

/// Composite Gauss–Legendre integral of `f` over [lo, hi] with panel widths set by
/// the local angular frequency `freq(x)`.
fn oscillatory_panels<F, G>(mut f: F, freq: G, lo: f64, hi: f64, ppw: f64, max_panel: f64) -> Complex64
where
    F: FnMut(f64) -> Complex64,
    G: Fn(f64, f64) -> f64,
{
    let (nodes, weights) = gauss_legendre(PANEL_ORDER);
    let span = PANEL_ORDER as f64 * 2.0 * PI / ppw;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut a = lo;
    while a < hi {
        let mut w = max_panel.min(hi - a);
        for _ in 0..3 {
            let fr = freq(a, a + w);
            if fr * w > span {
                w = span / fr;
            }
        }
        let b = (a + w).min(hi);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in nodes.iter().zip(weights.iter()) {
            acc += f(mid + half * x) * (wt * half);
        }
        a = b;
    }
    acc
}

/// ∫_lo^hi e^{iau²} f(u) du with panels refined where the chirp oscillates fast.
pub fn fresnel_integral<F>(mut f: F, a: f64, lo: f64, hi: f64, ppw: f64, max_panel: f64) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let freq = |p: f64, q: f64| {
        let far = p.abs().max(q.abs());
        let lin = 2.0 * a.abs() * far;
        // near u = 0 the phase is quadratic; bound the total turn over the panel
        let quad = if p <= 0.0 && q >= 0.0 { a.abs() * (q - p) } else { 0.0 };
        lin.max(quad)
    };
    oscillatory_panels(|u| Complex64::from_polar(1.0, a * u * u) * f(u), freq, lo, hi, ppw, max_panel)
}

/// Regularized Kannai transform with cutoff χ₀(εx₀).
pub fn kannai_quadrature<W>(
    w: W,
    constants: &PhysicalConstants,
    t: f64,
    epsilon: f64,
    opts: &KannaiOptions,
) -> Result<Complex64, BeamError>
where
    W: Fn(f64) -> Complex64,
{
    if !(t > 0.0) {
        return Err(BeamError::NonPositiveTime(t));
    }
    let reach = 1.0 / epsilon;
    let (mut lo, mut hi) = (-reach, reach);
    if let Some((a, b)) = opts.support {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let pref = kannai_prefactor(constants, t);
    if lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let a = constants.mass / (2.0 * constants.hbar * t);
    let freq = |p: f64, q: f64| {
        let far = p.abs().max(q.abs());
        2.0 * a * far + opts.carrier.abs() + if p <= 0.0 && q >= 0.0 { a * (q - p) } else { 0.0 }
    };
    let integrand = |x0: f64| {
        let cut = mollifier_eval(epsilon * x0);
        if cut == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(cut, a * x0 * x0) * w(x0)
        }
    };
    let val = oscillatory_panels(integrand, freq, lo, hi, opts.points_per_wavelength, opts.max_panel);
    Ok(pref * val)
}

/// Runs [`kannai_quadrature`] over [`EPSILON_SEQUENCE`] and checks that the last two
/// regularizations agree to `rel_tol`.
pub fn kannai_limit<W>(
    w: W,
    constants: &PhysicalConstants,
    t: f64,
    opts: &KannaiOptions,
    rel_tol: f64,
) -> Result<Complex64, BeamError>
where
    W: Fn(f64) -> Complex64,
{
    let mut vals = Vec::with_capacity(EPSILON_SEQUENCE.len());
    for &eps in &EPSILON_SEQUENCE {
        vals.push(kannai_quadrature(&w, constants, t, eps, opts)?);
    }
    let n = vals.len();
    let last = vals[n - 1];
    let diff = (last - vals[n - 2]).norm();
    if diff > rel_tol * last.norm().max(1e-300) {
        return Err(BeamError::NonconvergentTail(diff));
    }
    Ok(last)
}
