//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::io::Write;

use abw_beam::{kannai_limit, BeamSpec, KannaiOptions, PathExtent, StraightBeam};
use std::sync::Arc;

use abw_core::{Complex64, Domain, GridField, GridSpec, Obstacle, PhysicalConstants, Vec2};
use abw_experiments::presets;
use abw_experiments::*;
use abw_gauge::{apply_gauge, Bump, GaugeField, GaugeTransform, SmoothPhase};
use abw_solver::{build_link_phases, evolve, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

/// Written straight to stdout so the lines survive the harness's output capture.
fn report(n: usize, name: &str, outcome: &Outcome) {
    let tag = if outcome.0 { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    // the harness prints "test acceptance ... " without a newline before the first line
    if n == 1 {
        writeln!(out).unwrap();
    }
    writeln!(out, "{tag} criterion {n} ({name}): {}", outcome.1).unwrap();
    out.flush().unwrap();
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (icpt + slope * a)).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

fn criterion_1() -> Outcome {
    let alphas = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let mut measured = Vec::new();
    let mut predicted = Vec::new();
    let mut ok = true;
    let mut detail = String::new();
    for &a in &alphas {
        let spec = presets::single_obstacle(a, 80.0).unwrap();
        let r = magnetic_ab_single(&spec, Oracle::Beam).unwrap();
        let err = (r.measured_peak - r.predicted).abs() / r.predicted.max(0.05);
        ok &= err <= 0.15;
        detail += &format!("a={a:.3} m={:.4} p={:.4} rel={err:.3}; ", r.measured_peak, r.predicted);
        measured.push(r.measured_peak);
        predicted.push(r.predicted);
    }
    let monotone = measured.windows(2).all(|w| w[1] > w[0]);
    let r2 = r_squared(&predicted, &measured);
    ok &= monotone && r2 >= 0.95;
    (ok, format!("{detail}monotone={monotone} R2={r2:.5}"))
}

fn criterion_4() -> Outcome {
    let spec = presets::single_obstacle(PI, 80.0).unwrap();
    let (w, th) = (spec.beam_omega.direction, spec.beam_theta.direction);
    let study = flux_decomposition_study(&spec.field, spec.probe_center, w, th, &[10.0, 20.0, 40.0], 1e-3).unwrap();
    let exact = study
        .rows
        .iter()
        .all(|r| (r.combined - study.alpha).abs() <= 1e-3 || study.n0.is_none_or(|n0| r.n < n0));
    let bounded = study.rows.iter().all(|r| r.i3.abs() <= study.c_mean * (1.0 + study.c_spread) * study.sin_phi + 1e-12);
    let ok = exact && bounded && study.n0.is_some() && study.c_spread <= 0.2;
    let cs: Vec<String> = study.rows.iter().map(|r| format!("N={} C={:.3} dev={:.1e}", r.n, r.c_fit, (r.combined - study.alpha).abs())).collect();
    (ok, format!("N0={:?} {} spread={:.3}", study.n0, cs.join(", "), study.c_spread))
}

fn criterion_5() -> Outcome {
    let base = magnetic_ab_broken(&presets::several_obstacles(0.7, 40.0).unwrap(), Oracle::Beam).unwrap();
    let mut ok = (3.4..=4.6).contains(&base.measured_peak);
    let mut detail = format!("k={:.3} peak={:.4} |2c0|^2={:.4} alpha={:.4}", base.k, base.measured_peak, base.normalization, base.alpha_used);
    for d in [0.7 - PI / 3.0, 0.7 + PI / 3.0] {
        let r = magnetic_ab_broken(&presets::several_obstacles(d, 40.0).unwrap(), Oracle::Beam).unwrap();
        let change = (r.measured_peak - base.measured_peak).abs();
        ok &= change <= 0.1;
        detail += &format!("; decoy {d:.3}: peak {:.4} change {change:.4}", r.measured_peak);
    }
    (ok, detail)
}

fn report_numbers(r: &InterferenceReport) -> [f64; 9] {
    [
        r.measured_peak,
        r.predicted,
        r.alpha_used,
        r.alpha_estimated,
        r.relative_error,
        r.k,
        r.normalization,
        r.i3,
        r.error_bound,
    ]
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(24301);
    let base_spec = presets::single_obstacle(PI, 80.0).unwrap();
    let base = magnetic_ab_single(&base_spec, Oracle::Beam).unwrap();
    let b = report_numbers(&base);
    let mut worst_gauge: f64 = 0.0;
    for _ in 0..20 {
        let p = rng.gen_range(-2i64..=2);
        let bumps = (0..rng.gen_range(1..=3))
            .map(|_| Bump {
                center: Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(2.0..10.0)),
                radius: rng.gen_range(0.5..3.0),
                amplitude: rng.gen_range(-3.0..3.0),
            })
            .collect();
        let mut g = GaugeTransform::winding("tube", p);
        g.smooth_phase = SmoothPhase::Bumps(bumps);
        let mut spec = base_spec.clone();
        spec.field = apply_gauge(&base_spec.field, &g).unwrap();
        spec.initial_gauge = Some(g);
        let r = report_numbers(&magnetic_ab_single(&spec, Oracle::Beam).unwrap());
        for (x, y) in b.iter().zip(&r) {
            worst_gauge = worst_gauge.max((x - y).abs() / x.abs().max(1e-300));
        }
    }
    let mut min_change = f64::INFINITY;
    let mut min_at = 0.0;
    for _ in 0..20 {
        let da = rng.gen_range(0.3..(2.0 * PI - 0.3));
        let flux = (PI + da + PI).rem_euclid(2.0 * PI) - PI;
        let r = magnetic_ab_single(&presets::single_obstacle(flux, 80.0).unwrap(), Oracle::Beam).unwrap();
        let change = (r.measured_peak - base.measured_peak).abs();
        if change < min_change {
            min_change = change;
            min_at = da;
        }
    }
    let ok = worst_gauge <= 1e-6 && min_change >= 0.2;
    (
        ok,
        format!("max relative change under 20 gauges {worst_gauge:.2e}; min peak change under 20 flux perturbations {min_change:.4} (at d_alpha={min_at:.3})"),
    )
}

fn criterion_6() -> Outcome {
    let field = GaugeField::new(PhysicalConstants::default()).with_flux(None, Vec2::new(0.0, 2.0), PI);
    let tp = 2.0;
    let rel: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|&k| {
            let spec = BeamSpec::new(Vec2::new(-tp, 0.0), Vec2::new(1.0, 0.0), k, 1.0, 0.25, 2);
            let b = StraightBeam::new(spec, field.clone()).unwrap();
            let q = b.quadrature(Vec2::ZERO, tp / k).unwrap();
            let s = b.stationary_phase(Vec2::ZERO, tp / k, PathExtent::Finite).unwrap();
            (q - s).norm() / s.norm()
        })
        .collect();
    let ratios: Vec<f64> = rel.windows(2).map(|w| w[0] / w[1]).collect();
    let mut ok = ratios.iter().all(|r| (1.3..=2.7).contains(r));
    let c = PhysicalConstants::default();
    let (k, t) = (20.0, 0.05);
    let om = Vec2::from_angle(0.4);
    let x = Vec2::new(0.3, 0.2);
    let kw = c.wavenumber(k);
    let w = |x0: f64| Complex64::from_polar(1.0, kw * (x.dot(om) - x0)) + Complex64::from_polar(1.0, kw * (x.dot(om) + x0));
    let opts = KannaiOptions {
        carrier: kw,
        ..KannaiOptions::default()
    };
    let v = kannai_limit(w, &c, t, &opts, 1e-2).unwrap();
    let expect = Complex64::from_polar(2.0, -k * k * t / 2.0 + kw * x.dot(om));
    let plane = (v - expect).norm() / expect.norm();
    ok &= plane <= 1e-2;
    (ok, format!("relative gaps {} ratios {ratios:.3?}; plane wave error {plane:.2e}", sci(&rel)))
}

fn criterion_7() -> Outcome {
    let (k, d1) = (40.0, 18.0);
    let field = GaugeField::new(PhysicalConstants::default()).with_flux(None, Vec2::new(0.0, d1 + 2.0), PI);
    let ts = [0.05, 0.1, 0.2];
    let mut ok = true;
    let mut detail = String::new();
    let mut at_01 = Vec::new();
    for n in [1usize, 2] {
        let b = StraightBeam::new(BeamSpec::new(Vec2::ZERO, Vec2::new(1.0, 0.0), k, d1, 1.0, n), field.clone()).unwrap();
        let res: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let sample = GridSpec::new(Vec2::new(k * t - 40.0, -d1), 6.0, 14, 7).unwrap();
                b.residual_norm(&sample, t).unwrap()
            })
            .collect();
        let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ly: Vec<f64> = res.iter().map(|r| r.ln()).collect();
        let slope = fit_slope(&lx, &ly);
        ok &= (slope - n as f64).abs() <= 0.2 * n as f64;
        detail += &format!("N={n}: residuals {} slope {slope:.3}; ", sci(&res));
        at_01.push(res[1]);
    }
    let drop = at_01[0] / at_01[1];
    ok &= drop >= 1.8;
    (ok, format!("{detail}decrease per order at t=0.1: {drop:.2}x"))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for a in [0.0, PI / 2.0, PI] {
        let spec = presets::oracle_geometry(a, 80.0).unwrap();
        let ppw = spec.pde.as_ref().unwrap().points_per_wavelength;
        let r = magnetic_ab_single(&spec, Oracle::Both).unwrap();
        let dis = r.oracle_disagreement(0.05).unwrap();
        ok &= dis <= 0.15 && ppw >= 12.0;
        detail += &format!("a={a:.3} beam={:.4} pde={:.4} rel={dis:.3}; ", r.measured_peak, r.oracle_peak.unwrap());
    }
    (ok, format!("{detail}k=80, 12 points per wavelength"))
}

fn criterion_8() -> Outcome {
    let cfg = presets::electric_config(0.01, 1e-3).unwrap();
    let run = |spec: &ElectricABSpec| electric_ab(spec, &cfg).unwrap().max_difference;
    let split = run(&ElectricABSpec::new(0.5, PI, 0.0));
    let zero = run(&ElectricABSpec::new(0.5, 0.7, 0.7));
    let two_pi = run(&ElectricABSpec::new(0.5, 2.0 * PI, 0.0));
    let mut connected = ElectricABSpec::new(0.5, 1.3, 1.3);
    let tau = connected.schedule.tau_of_t.clone();
    connected.schedule.tau_of_t = Arc::new(move |t| tau(t).max(0.1));
    let joined = run(&connected);
    let ok = split >= 0.2 && zero <= 1e-3 && two_pi <= 1e-3 && joined <= 1e-6;
    (
        ok,
        format!("difference pi: {split:.4}; 0: {zero:.2e}; 2pi: {two_pi:.2e}; connected constant V: {joined:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let c = PhysicalConstants::default();
    let (lo, hi) = (Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0));
    let domain = Domain::empty((lo, hi));
    let field = GaugeField::new(c);
    let t = 0.1;
    let opts = MadelungOptions {
        threshold: 1e-3,
        region: Some((Vec2::new(-0.3, -0.5), Vec2::new(1.1, 0.5))),
    };
    let mut transport = Vec::new();
    let mut hj = Vec::new();
    for (h, dt) in [(0.04, 4e-3), (0.02, 2e-3), (0.01, 1e-3)] {
        let grid = GridSpec::covering(lo, hi, h).unwrap();
        let mut u0 = GridField::for_domain(grid, &domain);
        u0.fill_with(|x| Complex64::from_polar((-x.norm_sq() / (2.0 * 0.09)).exp(), 3.0 * x.x1));
        let snaps = evolve(&u0, &field, &domain, t + dt, &SolverConfig::new(grid, dt), &[t, t + dt]).unwrap();
        let d = madelung_residual(&snaps[0], &snaps[1], dt, &c, &opts).unwrap();
        transport.push(d.residual_transport);
        hj.push(d.residual_hj);
    }
    let order = |r: &[f64]| (r[0] / r[2]).log2() / 2.0;
    let (ot, oh) = (order(&transport), order(&hj));
    let ok = (1.5..=2.5).contains(&ot) && (1.5..=2.5).contains(&oh);
    (ok, format!("transport {} order {ot:.3}; Hamilton-Jacobi {} order {oh:.3}", sci(&transport), sci(&hj)))
}

fn gaussian(center: Vec2, sigma: f64, k: Vec2) -> impl Fn(Vec2) -> Complex64 + Sync {
    move |x: Vec2| Complex64::from_polar((-(x - center).norm_sq() / (2.0 * sigma * sigma)).exp(), k.dot(x))
}

fn criterion_10() -> Outcome {
    let (lo, hi) = (Vec2::new(-1.5, -1.5), Vec2::new(1.5, 1.5));
    let grid = GridSpec::covering(lo, hi, 0.05).unwrap();
    let center = Vec2::new(0.013, 0.021);
    let domain = Domain::new(vec![Obstacle::disk("c", center, 0.25).unwrap()], (lo, hi)).unwrap();
    let mut field = GaugeField::new(PhysicalConstants::default()).with_flux(Some("c"), center, 1.3);
    field.attach_to(&domain).unwrap();

    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.8, 0.1), 0.25, Vec2::new(6.0, 0.0)));
    let long = evolve(&u0, &field, &domain, 2.0, &SolverConfig::new(grid, 2e-3), &[]).unwrap();
    let drift = (long[0].l2_norm() - u0.l2_norm()).abs() / u0.l2_norm();

    let mut g = GaugeTransform::winding("c", 1);
    g.smooth_phase = SmoothPhase::Bumps(vec![Bump {
        center: Vec2::new(-0.4, 0.6),
        radius: 0.7,
        amplitude: 2.0,
    }]);
    let gauged = apply_gauge(&field, &g).unwrap();
    let mut v0 = u0.clone();
    v0.fill_with(|x| g.factor(&field, x).unwrap() * gaussian(Vec2::new(-0.8, 0.1), 0.25, Vec2::new(6.0, 0.0))(x));
    let cfg = SolverConfig::new(grid, 2e-3);
    let u = evolve(&u0, &field, &domain, 0.2, &cfg, &[]).unwrap().pop().unwrap();
    let v = evolve(&v0, &gauged, &domain, 0.2, &cfg, &[]).unwrap().pop().unwrap();
    let mut covariance: f64 = 0.0;
    for ((j, i), z) in u.values.indexed_iter() {
        let expect = z * g.factor(&field, grid.point(i, j)).unwrap();
        covariance = covariance.max((v.values[[j, i]] - expect).norm());
    }

    let links = build_link_phases(&field, &grid, &domain).unwrap();
    let plaquette = links.max_plaquette_flux(&grid.domain_mask(&domain));

    let (h, dt, k0) = (0.02, 1e-3, 10.0);
    let (flo, fhi) = (Vec2::new(-2.0, -1.5), Vec2::new(3.0, 1.5));
    let fgrid = GridSpec::covering(flo, fhi, h).unwrap();
    let free_domain = Domain::empty((flo, fhi));
    let mut w0 = GridField::for_domain(fgrid, &free_domain);
    w0.fill_with(gaussian(Vec2::ZERO, 0.3, Vec2::new(k0, 0.0)));
    let centroid = |f: &GridField| {
        let (mut m, mut s) = (0.0, 0.0);
        for ((j, i), &w) in f.density().indexed_iter() {
            m += w;
            s += w * fgrid.point(i, j).x1;
        }
        s / m
    };
    let w = evolve(&w0, &GaugeField::new(PhysicalConstants::default()), &free_domain, 100.0 * dt, &SolverConfig::new(fgrid, dt), &[]).unwrap();
    let expected = k0 * 100.0 * dt;
    let velocity = ((centroid(&w[0]) - centroid(&w0)) - expected).abs() / expected;

    let ok = drift <= 1e-9 && covariance <= 1e-9 && plaquette <= 1e-10 && velocity <= 0.01;
    (
        ok,
        format!("norm drift over 1000 steps {drift:.2e}; gauge covariance {covariance:.2e}; max plaquette flux {plaquette:.2e}; group velocity error {velocity:.2e}"),
    )
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn acceptance() {
    let mut all = true;
    for (n, name, f) in [
        (1usize, "interference law", criterion_1 as fn() -> Outcome),
        (2, "oracle cross-validation", criterion_2),
        (3, "gauge dichotomy", criterion_3),
        (4, "flux decomposition", criterion_4),
        (5, "several obstacles", criterion_5),
        (6, "Kannai consistency", criterion_6),
        (7, "residual decay", criterion_7),
        (8, "electric dichotomy", criterion_8),
        (9, "Madelung residuals", criterion_9),
        (10, "solver properties", criterion_10),
    ] {
        let o = f();
        report(n, name, &o);
        all &= o.0;
    }
    assert!(all);
}
