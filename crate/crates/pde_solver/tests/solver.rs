use std::sync::Arc;

use abw_core::{Complex64, Domain, GridField, GridSpec, Obstacle, Vec2};
use abw_gauge::{apply_gauge, Bump, GaugeField, GaugeTransform, SmoothPhase};
use abw_solver::{
    backward_evolve, backward_evolve_moving, build_all_link_phases, build_link_phases, evolve, evolve_moving_domain,
    evolve_with_links, read_abwf, step, write_abwf, write_csv, Boundary, LinkPhases, MovingDomainSchedule, Scheme,
    SolverConfig, SolverError,
};

fn gaussian(center: Vec2, sigma: f64, k: Vec2) -> impl Fn(Vec2) -> Complex64 + Sync {
    move |x: Vec2| {
        let d = x - center;
        Complex64::from_polar((-d.norm_sq() / (2.0 * sigma * sigma)).exp(), k.dot(x))
    }
}

fn disk_scene(h: f64) -> (GridSpec, Domain, GaugeField) {
    let lo = Vec2::new(-1.5, -1.5);
    let hi = Vec2::new(1.5, 1.5);
    let grid = GridSpec::covering(lo, hi, h).unwrap();
    let domain = Domain::new(vec![Obstacle::disk("c", Vec2::new(0.013, 0.021), 0.25).unwrap()], (lo, hi)).unwrap();
    let mut field = GaugeField::new(Default::default()).with_flux(Some("c"), Vec2::new(0.013, 0.021), 1.3);
    field.attach_to(&domain).unwrap();
    (grid, domain, field)
}

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    a.values.iter().zip(b.values.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rel_l2(a: &GridField, b: &GridField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn zero_state_stays_zero() {
    let (grid, domain, field) = disk_scene(0.05);
    let mut state = GridField::for_domain(grid, &domain);
    let links = build_link_phases(&field, &grid, &domain).unwrap();
    step(&mut state, &links, &|_| 0.0, &SolverConfig::new(grid, 1e-3)).unwrap();
    assert_eq!(state.max_abs(), 0.0);
}

#[test]
fn evolve_to_zero_returns_initial() {
    let (grid, domain, field) = disk_scene(0.05);
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.8, 0.0), 0.2, Vec2::new(3.0, 0.0)));
    let out = evolve(&u0, &field, &domain, 0.0, &SolverConfig::new(grid, 1e-3), &[]).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(max_diff(&out[0], &u0), 0.0);
}

#[test]
fn norm_conserved_over_1000_steps() {
    let (grid, domain, field) = disk_scene(0.05);
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.8, 0.1), 0.25, Vec2::new(6.0, 0.0)));
    let config = SolverConfig::new(grid, 2e-3);
    let out = evolve(&u0, &field, &domain, 2.0, &config, &[]).unwrap();
    let drift = (out[0].l2_norm() - u0.l2_norm()).abs() / u0.l2_norm();
    assert!(drift <= 1e-9, "drift {drift}");
}

#[test]
fn full_crank_nicolson_conserves_norm_and_tracks_adi() {
    let (grid, domain, field) = disk_scene(0.06);
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.8, 0.1), 0.25, Vec2::new(4.0, 0.0)));
    let mut cn = SolverConfig::new(grid, 1e-3);
    cn.scheme = Scheme::CrankNicolson;
    let a = evolve(&u0, &field, &domain, 0.05, &cn, &[]).unwrap().pop().unwrap();
    let b = evolve(&u0, &field, &domain, 0.05, &SolverConfig::new(grid, 1e-3), &[]).unwrap().pop().unwrap();
    assert!((a.l2_norm() - u0.l2_norm()).abs() / u0.l2_norm() < 1e-10);
    assert!(rel_l2(&a, &b) < 1e-2, "{}", rel_l2(&a, &b));
}

#[test]
fn free_gaussian_moves_at_group_velocity() {
    let h = 0.02;
    let dt = 1e-3;
    let k0 = 10.0;
    let lo = Vec2::new(-2.0, -1.5);
    let hi = Vec2::new(3.0, 1.5);
    let grid = GridSpec::covering(lo, hi, h).unwrap();
    let domain = Domain::empty((lo, hi));
    let field = GaugeField::new(Default::default());
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::ZERO, 0.3, Vec2::new(k0, 0.0)));
    let centroid = |f: &GridField| {
        let d = f.density();
        let (mut m, mut s) = (0.0, 0.0);
        for ((j, i), &w) in d.indexed_iter() {
            m += w;
            s += w * grid.point(i, j).x1;
        }
        s / m
    };
    let out = evolve(&u0, &field, &domain, 100.0 * dt, &SolverConfig::new(grid, dt), &[]).unwrap();
    let moved = centroid(&out[0]) - centroid(&u0);
    let expected = k0 * 100.0 * dt;
    assert!((moved - expected).abs() / expected < 0.01, "moved {moved}");
}

#[test]
fn gauge_covariance_is_exact() {
    let (grid, domain, field) = disk_scene(0.05);
    let g = GaugeTransform {
        windings: [("c".to_string(), 1)].into(),
        smooth_phase: SmoothPhase::Bumps(vec![Bump {
            center: Vec2::new(-0.4, 0.6),
            radius: 0.7,
            amplitude: 2.0,
        }]),
    };
    let gauged = apply_gauge(&field, &g).unwrap();
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.8, 0.1), 0.25, Vec2::new(5.0, 1.0)));
    let mut v0 = u0.clone();
    v0.fill_with(|x| g.factor(&field, x).unwrap() * gaussian(Vec2::new(-0.8, 0.1), 0.25, Vec2::new(5.0, 1.0))(x));
    let config = SolverConfig::new(grid, 2e-3);
    let u = evolve(&u0, &field, &domain, 0.2, &config, &[]).unwrap().pop().unwrap();
    let v = evolve(&v0, &gauged, &domain, 0.2, &config, &[]).unwrap().pop().unwrap();
    let mut expect = u.clone();
    for ((j, i), z) in expect.values.indexed_iter_mut() {
        *z *= g.factor(&field, grid.point(i, j)).unwrap();
    }
    assert!(max_diff(&v, &expect) < 1e-9, "{}", max_diff(&v, &expect));
}

#[test]
fn plaquettes_vanish_outside_and_enclose_flux() {
    let (grid, domain, field) = disk_scene(0.05);
    let links = build_link_phases(&field, &grid, &domain).unwrap();
    let mask = grid.domain_mask(&domain);
    assert!(links.max_plaquette_flux(&mask) <= 1e-10);
    for z in links.horizontal.iter().chain(links.vertical.iter()) {
        assert!((z.norm() - 1.0).abs() < 1e-14);
    }
    let all = build_all_link_phases(&field, &grid).unwrap();
    let (i0, j0) = grid.nearest(Vec2::new(-0.5, -0.5)).unwrap();
    let (i1, j1) = grid.nearest(Vec2::new(0.5, 0.5)).unwrap();
    assert!((all.enclosed_flux(i0, i1, j0, j1) - 1.3).abs() < 1e-10);
    assert_eq!(LinkPhases::identity(&grid).max_plaquette_flux(&mask), 0.0);
}

#[test]
fn edge_through_flux_center_is_rejected() {
    let grid = GridSpec::new(Vec2::new(-1.0, -1.0), 0.1, 21, 21).unwrap();
    let field = GaugeField::new(Default::default()).with_flux(None, Vec2::new(0.0, 0.0), 1.0);
    assert!(matches!(build_all_link_phases(&field, &grid), Err(SolverError::EdgeThroughFluxCenter { .. })));
}

#[test]
fn time_step_convergence_is_second_order() {
    let (grid, domain, field) = disk_scene(0.05);
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.7, 0.2), 0.2, Vec2::new(6.0, -1.0)));
    let run = |dt: f64| evolve(&u0, &field, &domain, 0.08, &SolverConfig::new(grid, dt), &[]).unwrap().pop().unwrap();
    let (a, b, c) = (run(8e-3), run(4e-3), run(2e-3));
    let ratio = a.sub(&b).unwrap().l2_norm() / b.sub(&c).unwrap().l2_norm();
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn snapshots_hit_requested_times() {
    let (grid, domain, field) = disk_scene(0.05);
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(-0.7, 0.2), 0.2, Vec2::new(6.0, -1.0)));
    let config = SolverConfig::new(grid, 1e-2);
    let snaps = evolve(&u0, &field, &domain, 0.05, &config, &[0.013, 0.05]).unwrap();
    let direct = evolve(&u0, &field, &domain, 0.013, &config, &[]).unwrap();
    assert_eq!(snaps.len(), 2);
    assert!(max_diff(&snaps[0], &direct[0]) < 1e-14);
    assert!(matches!(
        evolve(&u0, &field, &domain, 0.05, &config, &[0.03, 0.01]),
        Err(SolverError::BadSnapshotTime(_))
    ));
}

#[test]
fn backward_then_forward_round_trips() {
    let (grid, domain, _) = disk_scene(0.05);
    let free = GaugeField::new(Default::default());
    let mut fin = GridField::for_domain(grid, &domain);
    fin.fill_with(gaussian(Vec2::new(0.6, -0.3), 0.2, Vec2::new(-3.0, 2.0)));
    let config = SolverConfig::new(grid, 2e-3);
    let u0 = backward_evolve(&fin, &domain, 0.3, &config).unwrap();
    assert!((u0.l2_norm() - fin.l2_norm()).abs() / fin.l2_norm() < 1e-10);
    let back = evolve(&u0, &free, &domain, 0.3, &config, &[]).unwrap().pop().unwrap();
    assert!(rel_l2(&back, &fin) <= 1e-8, "{}", rel_l2(&back, &fin));
    let zero = GridField::for_domain(grid, &domain);
    assert_eq!(backward_evolve(&zero, &domain, 0.3, &config).unwrap().max_abs(), 0.0);
}

#[test]
fn absorbing_rim_removes_outgoing_norm() {
    let lo = Vec2::new(-1.0, -1.0);
    let hi = Vec2::new(1.0, 1.0);
    let grid = GridSpec::covering(lo, hi, 0.02).unwrap();
    let domain = Domain::empty((lo, hi));
    let field = GaugeField::new(Default::default());
    let mut u0 = GridField::for_domain(grid, &domain);
    u0.fill_with(gaussian(Vec2::new(0.3, 0.0), 0.12, Vec2::new(15.0, 0.0)));
    let mut config = SolverConfig::new(grid, 1e-3);
    config.boundary = Boundary::DirichletPlusAbsorbingRim { width: 0.4, strength: 60.0 };
    let out = evolve(&u0, &field, &domain, 0.25, &config, &[]).unwrap();
    assert!(out[0].l2_norm() < 0.2 * u0.l2_norm(), "{}", out[0].l2_norm() / u0.l2_norm());
    config.boundary = Boundary::DirichletPlusAbsorbingRim { width: 0.6, strength: 60.0 };
    assert!(config.validate().is_err());
}

fn moving_grid() -> GridSpec {
    GridSpec::covering(Vec2::new(-1.02, -1.02), Vec2::new(1.02, 1.02), 0.02).unwrap()
}

fn two_lobes(grid: GridSpec, mask: ndarray::Array2<bool>) -> GridField {
    GridField::from_fn(grid, mask, |x| {
        let up = gaussian(Vec2::new(0.0, 0.72), 0.08, Vec2::ZERO)(x);
        let down = gaussian(Vec2::new(0.05, -0.72), 0.08, Vec2::new(1.0, 0.0))(x);
        up + down
    })
    .unwrap()
}

#[test]
fn frozen_moving_domain_matches_static_evolution() {
    let grid = moving_grid();
    let schedule = MovingDomainSchedule::fixed(0.5);
    let mask = schedule.mask_at(&grid, 0.0);
    let u0 = two_lobes(grid, mask);
    let config = SolverConfig::new(grid, 2e-3);
    let a = evolve_moving_domain(&u0, &schedule, &config, &[0.1]).unwrap();
    let b = evolve_with_links(&u0, LinkPhases::identity(&grid), &|_, _| 0.0, &config, 0.0, &[0.1]).unwrap();
    assert!(max_diff(&a[0], &b[0]) <= 1e-10);
}

#[test]
fn uniform_potential_leaves_density_unchanged() {
    let grid = moving_grid();
    let mut base = MovingDomainSchedule::standard(0.4);
    base.max_norm_loss = 1.0;
    let v = base.clone().with_potentials(Arc::new(|t: f64| 3.0 * t), Arc::new(|t: f64| 3.0 * t));
    let u0 = two_lobes(grid, base.mask_at(&grid, 0.0));
    let config = SolverConfig::new(grid, 5e-3);
    let times = [0.3, 0.7, 1.2];
    let a = evolve_moving_domain(&u0, &base, &config, &times).unwrap();
    let b = evolve_moving_domain(&u0, &v, &config, &times).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let d = (&x.density() - &y.density()).iter().fold(0.0f64, |m, z| m.max(z.abs()));
        assert!(d <= 1e-9, "{d}");
    }
}

#[test]
fn split_domain_potentials_only_change_phase_during_hold() {
    let grid = moving_grid();
    let base = MovingDomainSchedule::fixed(0.0);
    let v = base.clone().with_potentials(Arc::new(|_| 2.0), Arc::new(|_| -1.0));
    let u0 = two_lobes(grid, base.mask_at(&grid, 0.0));
    let config = SolverConfig::new(grid, 5e-3);
    let a = evolve_moving_domain(&u0, &base, &config, &[0.2]).unwrap();
    let b = evolve_moving_domain(&u0, &v, &config, &[0.2]).unwrap();
    let d = (&a[0].density() - &b[0].density()).iter().fold(0.0f64, |m, z| m.max(z.abs()));
    assert!(d <= 1e-9, "{d}");
    let upper = grid.nearest(Vec2::new(0.0, 0.72)).unwrap();
    let ratio = b[0].get(upper.0, upper.1) / a[0].get(upper.0, upper.1);
    assert!((ratio - Complex64::from_polar(1.0, -0.4)).norm() < 1e-9);
}

#[test]
fn standard_schedule_masks() {
    let grid = moving_grid();
    let s = MovingDomainSchedule::standard(1.0);
    assert_eq!(s.tau(0.0), 0.5);
    assert_eq!(s.tau(1.0), 0.0);
    assert!((s.tau(1.75) - 0.25).abs() < 1e-15);
    let hold = s.mask_at(&grid, 1.0);
    let (i, j) = grid.nearest(Vec2::new(0.0, 0.0)).unwrap();
    assert!(!hold[[j, i]]);
    let open = s.mask_at(&grid, 0.0);
    assert!(open[[j, i]]);
    let (i, j) = grid.nearest(Vec2::new(0.7, 0.0)).unwrap();
    assert!(!open[[j, i]]);
}

#[test]
fn fast_boundary_motion_is_flagged() {
    let grid = moving_grid();
    let mut s = MovingDomainSchedule::standard(0.2);
    s.max_norm_loss = 1e-6;
    let u0 = GridField::from_fn(grid, s.mask_at(&grid, 0.0), gaussian(Vec2::ZERO, 0.3, Vec2::ZERO)).unwrap();
    let r = evolve_moving_domain(&u0, &s, &SolverConfig::new(grid, 1e-2), &[0.5]);
    assert!(matches!(r, Err(SolverError::NormLossExceeded { .. })));
}

#[test]
fn moving_backward_solve_recovers_hold_data() {
    let grid = moving_grid();
    let s = MovingDomainSchedule::standard(0.5);
    let fin = two_lobes(grid, s.mask_at(&grid, 0.5));
    let config = SolverConfig::new(grid, 2.5e-3);
    let u0 = backward_evolve_moving(&fin, &s, &config, 0.5, 0.0).unwrap();
    assert!((u0.l2_norm() - fin.l2_norm()).abs() / fin.l2_norm() < 1e-6);
    let fwd = evolve_moving_domain(&u0, &s, &config, &[0.5]).unwrap();
    assert!(rel_l2(&fwd[0], &fin) < 0.05, "{}", rel_l2(&fwd[0], &fin));
}

#[test]
fn csv_and_binary_exports() {
    let grid = GridSpec::new(Vec2::new(-0.5, 0.25), 0.125, 5, 3).unwrap();
    let mut f = GridField::unmasked(grid);
    f.fill_with(|x| Complex64::new(x.x1, x.x2 * 2.0));
    let mut csv = Vec::new();
    write_csv(&f, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[0], "x1,x2,re_u,im_u,abs_u_sq");
    assert_eq!(lines[2], "-0.375,0.25,-0.375,0.5,0.390625");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.abwf");
    write_abwf(&f, std::fs::File::create(&path).unwrap()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"ABWF");
    assert_eq!(bytes.len(), 4 + 4 + 16 + 24 + 15 * 16);
    let back = read_abwf(bytes.as_slice()).unwrap();
    assert_eq!(back.spec, grid);
    assert_eq!(back.values, f.values);
    assert!(matches!(read_abwf(&b"ABWX"[..]), Err(SolverError::Format(_))));
    assert!(matches!(read_abwf(&bytes[..30]), Err(SolverError::Format(_))));
}

#[test]
fn config_round_trips_through_json() {
    let grid = GridSpec::new(Vec2::ZERO, 0.1, 10, 10).unwrap();
    let mut c = SolverConfig::new(grid, 1e-3);
    c.boundary = Boundary::DirichletPlusAbsorbingRim { width: 0.2, strength: 5.0 };
    let s = serde_json::to_string(&c).unwrap();
    let back: SolverConfig = serde_json::from_str(&s).unwrap();
    assert_eq!(back, c);
    assert!(serde_json::from_str::<SolverConfig>(&s.replace("\"dt\"", "\"dtt\"")).is_err());
}
