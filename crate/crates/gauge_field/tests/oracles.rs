use std::f64::consts::PI;

use abw_core::{Contour, Domain, Obstacle, PhysicalConstants, Vec2};
use abw_gauge::*;
use proptest::prelude::*;

fn two_disks() -> (Domain, GaugeField) {
    let domain = Domain::new(
        vec![
            Obstacle::disk("left", Vec2::new(-2.0, 0.0), 0.5).unwrap(),
            Obstacle::disk("right", Vec2::new(2.0, 0.0), 0.5).unwrap(),
        ],
        (Vec2::new(-20.0, -20.0), Vec2::new(20.0, 20.0)),
    )
    .unwrap();
    let mut f = GaugeField::new(PhysicalConstants::default())
        .with_flux(None, Vec2::new(-2.0, 0.0), PI / 2.0)
        .with_flux(None, Vec2::new(2.0, 0.0), PI);
    f.attach_to(&domain).unwrap();
    (domain, f)
}

fn single(flux: f64) -> (Domain, GaugeField) {
    let domain = Domain::new(
        vec![Obstacle::disk("o", Vec2::ZERO, 0.5).unwrap()],
        (Vec2::new(-20.0, -20.0), Vec2::new(20.0, 20.0)),
    )
    .unwrap();
    let mut f = canonical_flux_potential(Vec2::ZERO, flux, PhysicalConstants::default());
    f.attach_to(&domain).unwrap();
    (domain, f)
}

#[test]
fn canonical_term_fluxes() {
    let (d, f) = single(PI);
    let r = line_integral_flux(&f, &Contour::circle(Vec2::ZERO, 1.0, 64), &d).unwrap();
    assert!((r.flux - PI).abs() < 1e-10);
    let (d, f) = single(2.0 * PI);
    let sq = Contour::rectangle(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0));
    assert!((line_integral_flux(&f, &sq, &d).unwrap().flux - 2.0 * PI).abs() < 1e-10);
    let (d, f) = single(1.234);
    let r = line_integral_flux(&f, &Contour::circle(Vec2::ZERO, 2.0, 64), &d).unwrap();
    assert!((r.flux - 1.234).abs() < 1e-10);
    assert_eq!(r.per_obstacle["o"], 1);
}

#[test]
fn two_term_fluxes() {
    let (d, f) = two_disks();
    let r = line_integral_flux(&f, &Contour::circle(Vec2::new(2.0, 0.0), 1.0, 64), &d).unwrap();
    assert!((r.flux - PI).abs() < 1e-10);
    let r = line_integral_flux(&f, &Contour::circle(Vec2::ZERO, 10.0, 64), &d).unwrap();
    assert!((r.flux - 1.5 * PI).abs() < 1e-10);
    let rec = r.record("big");
    let json = serde_json::to_string(&rec).unwrap();
    assert!(json.contains("\"contour_id\":\"big\""));
}

#[test]
fn intersecting_contour_rejected() {
    let (d, f) = single(1.0);
    let c = Contour::circle(Vec2::new(0.4, 0.0), 0.3, 16);
    assert!(matches!(
        line_integral_flux(&f, &c, &d),
        Err(GaugeError::ContourIntersectsObstacle { .. })
    ));
}

#[test]
fn gauge_examples() {
    let (d, f) = single(PI);
    let basis = vec![Contour::circle(Vec2::ZERO, 1.0, 32)];
    let g = apply_gauge(&f, &GaugeTransform::winding("o", 1)).unwrap();
    assert!(is_gauge_equivalent(&f, &g, &basis, &d).unwrap());
    let (_, z) = single(0.0);
    assert!(!is_gauge_equivalent(&f, &z, &basis, &d).unwrap());
    let smooth = GaugeTransform::smooth(SmoothPhase::Bumps(vec![Bump {
        center: Vec2::new(1.0, 0.5),
        radius: 1.2,
        amplitude: 3.0,
    }]));
    let g = apply_gauge(&f, &smooth).unwrap();
    let r = line_integral_flux(&g, &Contour::circle(Vec2::new(0.5, 0.0), 1.5, 64), &d).unwrap();
    assert!((r.flux - PI).abs() < 1e-9);
    assert!(is_gauge_equivalent(&f, &g, &basis, &d).unwrap());
}

#[test]
fn bad_basis_rejected() {
    let (d, f) = two_disks();
    let basis = vec![Contour::circle(Vec2::ZERO, 10.0, 64)];
    assert!(matches!(
        is_gauge_equivalent(&f, &f, &basis, &d),
        Err(GaugeError::BadBasis { .. })
    ));
}

#[test]
fn curl_examples() {
    let f = canonical_flux_potential(Vec2::ZERO, 1.7, PhysicalConstants::default());
    let pts: Vec<Vec2> = (0..200)
        .map(|k| Vec2::from_angle(k as f64 * 0.7) * (1.0 + 4.0 * (k as f64 / 199.0)))
        .collect();
    assert!(curl_residual_at(&f, &pts, 1e-4).unwrap() <= 1e-6);
    let z = GaugeField::new(PhysicalConstants::default());
    assert_eq!(curl_residual_at(&z, &pts, 1e-4).unwrap(), 0.0);
    let domain = Domain::new(
        vec![
            Obstacle::disk("a", Vec2::new(-3.0, 0.0), 0.5).unwrap(),
            Obstacle::disk("b", Vec2::new(3.0, 0.0), 0.5).unwrap(),
            Obstacle::disk("c", Vec2::new(0.0, 3.0), 0.5).unwrap(),
        ],
        (Vec2::new(-6.0, -6.0), Vec2::new(6.0, 6.0)),
    )
    .unwrap();
    let f3 = GaugeField::new(PhysicalConstants::default())
        .with_flux(None, Vec2::new(-3.0, 0.0), 1.0)
        .with_flux(None, Vec2::new(3.0, 0.0), -2.0)
        .with_flux(None, Vec2::new(0.0, 3.0), 0.4);
    assert!(curl_residual(&f3, &domain, 2500).unwrap() <= 1e-6);
}

#[test]
fn decomposition_recovers_flux() {
    let phi: f64 = 0.05f64.atan();
    let omega = Vec2::new(-phi.sin(), phi.cos());
    let theta = Vec2::new(phi.sin(), phi.cos());
    let x0 = Vec2::new(0.0, 8.0);
    let f = canonical_flux_potential(Vec2::new(0.0, 5.0), 1.1, PhysicalConstants::default());
    let mut last_i3: f64 = 0.0;
    for n in [20.0, 100.0, 1000.0] {
        let r = flux_decomposition(&f, x0, omega, theta, n).unwrap();
        let (i1, i2, i3) = r.partial_integrals.unwrap();
        // the triangle x0, x0 - N omega, x0 - N theta is traversed clockwise here
        assert!((-i1 + i2 + i3 + 1.1).abs() < 1e-9);
        last_i3 = i3;
        assert!(i3.abs() <= 1.1 * phi.sin() * 2.0);
    }
    // the closing segment's share decays to its limiting angle, bounded by C·sin φ
    assert!(last_i3.abs() < 0.05);
}

proptest! {
    #[test]
    fn flux_additivity(a in -5.0f64..5.0, b in -5.0f64..5.0, cx in -0.5f64..0.5, cy in -0.5f64..0.5, r in 3.2f64..8.0) {
        let (d, _) = two_disks();
        let mut f = GaugeField::new(PhysicalConstants::default())
            .with_flux(None, Vec2::new(-2.0, 0.0), a)
            .with_flux(None, Vec2::new(2.0, 0.0), b);
        f.attach_to(&d).unwrap();
        let c = Contour::circle(Vec2::new(cx, cy), r, 48);
        let rep = line_integral_flux(&f, &c, &d).unwrap();
        let expect = rep.per_obstacle["left"] as f64 * a + rep.per_obstacle["right"] as f64 * b;
        prop_assert!((rep.flux - expect).abs() < 1e-8);
    }

    #[test]
    fn homotopy_invariance(s in 0.6f64..1.8, n in 8usize..40, flux in -4.0f64..4.0) {
        let (d, f) = single(flux);
        let c1 = Contour::circle(Vec2::ZERO, s, n);
        let c2 = Contour::rectangle(Vec2::new(-2.0, -1.5), Vec2::new(3.0, 2.5));
        let f1 = line_integral_flux(&f, &c1, &d).unwrap().flux;
        let f2 = line_integral_flux(&f, &c2, &d).unwrap().flux;
        prop_assert!((f1 - f2).abs() < 1e-8);
    }

    #[test]
    fn gauge_transforms_are_equivalent(p in -3i64..3, amp in -5.0f64..5.0, bx in -2.0f64..2.0, rad in 0.3f64..2.0) {
        let (d, f) = single(0.7);
        let g = GaugeTransform {
            windings: [("o".to_string(), p)].into_iter().collect(),
            smooth_phase: SmoothPhase::Bumps(vec![Bump { center: Vec2::new(bx, 1.0), radius: rad, amplitude: amp }]),
        };
        let f2 = apply_gauge(&f, &g).unwrap();
        let basis = vec![Contour::circle(Vec2::ZERO, 1.3, 40)];
        prop_assert!(is_gauge_equivalent(&f, &f2, &basis, &d).unwrap());
    }
}
