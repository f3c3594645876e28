use std::f64::consts::{E, PI};

use super::*;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn model(dim: usize, warp: &str) -> ModelSpace {
    ModelSpace::new(dim, WarpingSpec::parse(warp).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Composite Simpson rule, kept independent of the adaptive integrator.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

#[test]
fn unit_sphere_measures() {
    assert!(rel(unit_sphere_measure(2), 2.0 * PI) < 1e-15);
    assert!(rel(unit_sphere_measure(3), 4.0 * PI) < 1e-15);
    assert!(rel(unit_sphere_measure(4), 2.0 * PI * PI) < 1e-15);
    assert!(rel(unit_sphere_measure(5), 8.0 * PI * PI / 3.0) < 1e-15);
}

#[test]
fn eta_examples() {
    assert_eq!(model(5, "r").eta(4.0).unwrap(), 0.25);
    let coth1 = 1f64.cosh() / 1f64.sinh();
    assert!(rel(model(2, "b=-1").eta(1.0).unwrap(), coth1) < 1e-15);
    assert!((coth1 - 1.3130).abs() < 1e-4);
    assert!(model(2, "b=1").eta(PI / 2.0).unwrap().abs() < 1e-15);
    // series branch near the origin
    let tiny = 1e-10;
    assert!(rel(model(2, "sinh(r)").eta(tiny).unwrap(), 1.0 / tiny) < 1e-15);
    assert!(model(2, "r").eta(0.0).is_err());
    assert!(model(2, "b=1").eta(4.0).is_err());
}

#[test]
fn sphere_and_ball_volumes() {
    let q = q();
    assert!(rel(model(2, "r").vol_sphere(3.0).unwrap(), 6.0 * PI) < 1e-15);
    assert!(rel(model(3, "r").vol_sphere(2.0).unwrap(), 16.0 * PI) < 1e-15);
    assert!(rel(model(2, "b=-1").vol_sphere(1.0).unwrap(), 2.0 * PI * 1f64.sinh()) < 1e-15);
    assert!(rel(model(2, "r").vol_ball(2.0, &q).unwrap(), 4.0 * PI) < 1e-15);
    assert!(rel(model(2, "b=-1").vol_ball(1.0, &q).unwrap(), 2.0 * PI * (1f64.cosh() - 1.0)) < 1e-14);
    assert!((model(2, "b=-1").vol_ball(1.0, &q).unwrap() - 3.41228).abs() < 1e-5);
    assert!(rel(model(3, "r").vol_ball(1.0, &q).unwrap(), 4.0 * PI / 3.0) < 1e-15);
}

#[test]
fn closed_forms_agree_with_quadrature_of_custom_warps() {
    let q = q();
    let pairs = [("b=-1", "sinh(r)"), ("b=-2", "sinh(sqrt(2)*r)/sqrt(2)"), ("b=1", "sin(r)"), ("b=0", "r")];
    for (closed, custom) in pairs {
        for dim in 2..=5 {
            let a = model(dim, closed);
            let b = model(dim, custom);
            for r in [0.05, 0.3, 0.9, 1.7, 2.5] {
                let va = a.vol_ball(r, &q).unwrap();
                let vb = b.vol_ball(r, &q).unwrap();
                assert!(rel(va, vb) < 1e-9, "{closed} m={dim} r={r}: {va} vs {vb}");
            }
            let ca = a.capacity_model(0.4, 2.2, &q).unwrap();
            let cb = b.capacity_model(0.4, 2.2, &q).unwrap();
            assert!(rel(ca, cb) < 1e-9, "{closed} m={dim}: {ca} vs {cb}");
        }
    }
}

#[test]
fn iso_quotient_examples() {
    let q = q();
    assert!(rel(model(2, "r").iso_quotient(4.0, &q).unwrap(), 2.0) < 1e-15);
    assert_eq!(model(3, "r").iso_quotient(0.0, &q).unwrap(), 0.0);
    assert!(model(3, "r").iso_quotient(1e-9, &q).unwrap() < 1e-9);
    assert!((model(2, "b=-1").iso_quotient(20.0, &q).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn balance_examples() {
    let q = q();
    let grid = RadiusGrid::linspace(0.05, 5.0, 100).unwrap();
    let flat = model(3, "r").balance_check(&grid, &q).unwrap();
    assert!(flat.below);
    assert!(flat.worst_below_margin.abs() < 1e-12);
    for &r in grid.points() {
        let m = model(3, "r");
        assert!((m.iso_quotient(r, &q).unwrap() * m.eta(r).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
    let hyp = model(2, "b=-1").balance_check(&grid, &q).unwrap();
    assert!(hyp.below);
    assert!(hyp.worst_below_margin > 0.0);
    let sph_grid = RadiusGrid::linspace(0.05, 3.0, 60).unwrap();
    let sph = model(2, "b=1").balance_check(&sph_grid, &q).unwrap();
    assert!(!sph.below);
    assert!(sph.worst_below_at > PI / 2.0);
}

#[test]
fn capacity_examples() {
    let q = q();
    assert!(rel(model(2, "r").capacity_model(1.0, E, &q).unwrap(), 2.0 * PI) < 1e-14);
    assert!(rel(model(3, "r").capacity_model(1.0, 2.0, &q).unwrap(), 8.0 * PI) < 1e-14);
    let oracle = 2.0 * PI / simpson(|s| 1.0 / s.sinh(), 1.0, 2.0, 2000);
    let cap = model(2, "b=-1").capacity_model(1.0, 2.0, &q).unwrap();
    assert!(rel(cap, oracle) < 1e-10);
    assert!((cap - 12.5765).abs() < 1e-4);
    assert!(model(2, "r").capacity_model(2.0, 1.0, &q).is_err());
    assert!(model(2, "b=1").capacity_model(1.0, 4.0, &q).is_err());
}

#[test]
fn potential_examples() {
    let q = q();
    let m = model(2, "r");
    assert_eq!(m.potential_model(1.0, 3.0, 1.0, &q).unwrap(), 0.0);
    assert_eq!(m.potential_model(1.0, 3.0, 3.0, &q).unwrap(), 1.0);
    assert!((m.potential_model(1.0, E * E, E, &q).unwrap() - 0.5).abs() < 1e-14);
    assert!(m.potential_model(1.0, 3.0, 3.5, &q).is_err());
}

#[test]
fn potential_is_monotone_and_model_harmonic() {
    let q = q();
    for warp in ["r", "b=-1", "r + r^3", "sinh(r)"] {
        let m = model(3, warp);
        let (rho, big_r) = (0.5, 2.5);
        let psi = |t: f64| m.potential_model(rho, big_r, t, &q).unwrap();
        let mut prev = 0.0;
        for i in 1..=40 {
            let t = rho + (big_r - rho) * i as f64 / 40.0;
            let v = psi(t);
            assert!(v >= prev);
            prev = v;
        }
        // (Ψ' w^{m-1})' = 0: the flux Ψ' w^{m-1} is constant
        let h = 1e-4;
        let flux = |t: f64| (psi(t + h) - psi(t - h)) / (2.0 * h) * m.warp().w(t).unwrap().powi(2);
        let f0 = flux(1.0);
        for t in [0.8, 1.4, 2.0] {
            assert!(rel(flux(t), f0) < 1e-6, "{warp} at {t}");
        }
    }
}

#[test]
fn mean_exit_examples() {
    let q = q();
    assert!(rel(model(2, "r").mean_exit_model(2.0, 0.0, &q).unwrap(), 1.0) < 1e-15);
    assert_eq!(model(2, "b=-1").mean_exit_model(2.0, 2.0, &q).unwrap(), 0.0);
    assert!(rel(model(3, "r").mean_exit_model(3.0, 1.0, &q).unwrap(), 8.0 / 6.0) < 1e-15);
    assert!(model(2, "r").mean_exit_model(1.0, 2.0, &q).is_err());
    // quadrature branch against the closed form
    let custom = model(3, "r").mean_exit_model(3.0, 1.0, &q).unwrap();
    let via_quad = model(3, "r*1 + 0*r^2 + r^3 - r^3").mean_exit_model(3.0, 1.0, &q).unwrap();
    assert!(rel(custom, via_quad) < 1e-9);
}

#[test]
fn mean_exit_is_additive() {
    let q = q();
    let m = model(2, "b=-1");
    let big_r = 2.0;
    let e0 = m.mean_exit_model(big_r, 0.0, &q).unwrap();
    for r in [0.3, 1.0, 1.7] {
        let er = m.mean_exit_model(big_r, r, &q).unwrap();
        let part = simpson(|t| m.iso_quotient(t, &q).unwrap(), 0.0, r, 400);
        assert!((e0 - er - part).abs() < 1e-9);
    }
}

#[test]
fn ball_volume_derivative_is_sphere_volume() {
    let q = q();
    for (dim, warp) in [(2, "r"), (3, "b=-1"), (4, "r + r^2/2 + r^3"), (3, "b=1")] {
        let m = model(dim, warp);
        for r in [0.4, 1.1, 2.0] {
            let h = 1e-5;
            let fd = (m.vol_ball(r + h, &q).unwrap() - m.vol_ball(r - h, &q).unwrap()) / (2.0 * h);
            assert!(rel(fd, m.vol_sphere(r).unwrap()) < 1e-6, "{warp} m={dim} r={r}");
        }
    }
}

#[test]
fn parabolicity_examples() {
    let q = q();
    use ParabolicityVerdict::*;
    assert_eq!(model(2, "r").parabolicity_test(&q).unwrap().verdict, Parabolic);
    assert_eq!(model(3, "r").parabolicity_test(&q).unwrap().verdict, Hyperbolic);
    assert_eq!(model(2, "b=-1").parabolicity_test(&q).unwrap().verdict, Hyperbolic);
    assert_eq!(model(2, "sinh(r)").parabolicity_test(&q).unwrap().verdict, Hyperbolic);
    assert_eq!(model(2, "r + r^2").parabolicity_test(&q).unwrap().verdict, Hyperbolic);
    let p = model(2, "r").parabolicity_test(&q).unwrap();
    assert_eq!(p.ladder, vec![1.0, 10.0, 100.0, 1000.0, 10000.0]);
    assert_eq!(p.increments.len(), 4);
    assert!(model(2, "b=1").parabolicity_test(&q).is_err());
}

#[test]
fn tone_limits() {
    let q = q();
    let grid = RadiusGrid::linspace(0.5, 30.0, 60).unwrap();
    let hyp = model(2, "b=-1").tone_upper_limit(&grid, &q).unwrap();
    assert!((hyp.reported_limsup - 1.0).abs() < 1e-3);
    let custom = model(2, "sinh(r)").tone_upper_limit(&grid, &q).unwrap();
    assert!((custom.reported_limsup - 1.0).abs() < 1e-3);
    let flat = model(2, "r").tone_upper_limit(&grid, &q).unwrap();
    assert_eq!(flat.reported_limsup, 0.0);
    assert!(flat.warning.is_some());
    let k2 = model(3, "sinh(sqrt(2)*r)/sqrt(2)").tone_upper_limit(&grid, &q).unwrap();
    assert!((k2.reported_limsup - 8.0).abs() < 8e-3, "{}", k2.reported_limsup);
    let k2_closed = model(3, "b=-2").tone_upper_limit(&grid, &q).unwrap();
    assert!((k2_closed.reported_limsup - 8.0).abs() < 8e-3);
}

#[test]
fn cheeger_examples() {
    let q = q();
    let grid = RadiusGrid::linspace(0.5, 30.0, 60).unwrap();
    let hyp = model(2, "b=-1").cheeger_bound(&grid, &q).unwrap();
    assert!((hyp.sup_q - 1.0).abs() < 1e-6);
    assert!((hyp.lower_bound - 0.25).abs() < 1e-6);
    let flat = model(2, "r").cheeger_bound(&grid, &q).unwrap();
    assert!(flat.unbounded);
    assert_eq!(flat.lower_bound, 0.0);
    let steep = model(2, "sinh(2*r)/2").cheeger_bound(&grid, &q).unwrap();
    assert!((steep.sup_q - 0.5).abs() < 1e-6);
    assert!((steep.lower_bound - 1.0).abs() < 1e-5);
}

#[test]
fn ends_coefficient_examples() {
    let q = q();
    let grid = RadiusGrid::linspace(0.5, 50.0, 100).unwrap();
    for dim in 2..=4 {
        let flat = model(dim, "r").ends_coefficient(&grid, &q).unwrap();
        for (_, v) in &flat.samples {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!((flat.reported_limsup - 1.0).abs() < 1e-14);
    }
    assert!(model(2, "b=-1").ends_coefficient(&grid, &q).unwrap().is_divergent());
    let bounded = model(2, "r/(1 + r)").ends_coefficient(&RadiusGrid::linspace(1.0, 1000.0, 200).unwrap(), &q).unwrap();
    assert_eq!(bounded.trend, Trend::Decreasing);
    assert!(bounded.reported_limsup < 5e-3);
    let sph = model(2, "b=1").ends_coefficient(&RadiusGrid::linspace(0.1, 3.0, 30).unwrap(), &q).unwrap();
    assert!(sph.warning.is_some());
}

#[test]
fn q_linear_bound_examples() {
    let q = q();
    let grid = RadiusGrid::linspace(0.05, 10.0, 80).unwrap();
    assert!(model(2, "r").check_q_linear_bound(&grid, &q).unwrap());
    assert!(model(2, "b=-1").check_q_linear_bound(&grid, &q).unwrap());
    let half = RadiusGrid::linspace(0.05, PI / 2.0, 40).unwrap();
    assert!(model(2, "b=1").check_q_linear_bound(&half, &q).unwrap());
    for warp in ["r + r^3", "sinh(2*r)/2", "r/(1 + r)", "exp(r) - 1"] {
        assert!(model(3, warp).check_q_linear_bound(&grid, &q).unwrap(), "{warp}");
    }
}

#[test]
fn grid_parsing() {
    let g = RadiusGrid::parse("1:3:5").unwrap();
    assert_eq!(g.points(), &[1.0, 1.5, 2.0, 2.5, 3.0]);
    assert!(RadiusGrid::parse("1:3").is_err());
    assert!(RadiusGrid::parse("3:1:4").is_err());
    assert!(RadiusGrid::parse("0:1:4").is_err());
    assert!(RadiusGrid::new(vec![]).is_err());
}

#[test]
fn quadrature_config_validation() {
    let bad = QuadratureConfig { abs_tol: 0.0, ..Default::default() };
    assert!(model(2, "r").parabolicity_test(&bad).is_err());
    assert!(ModelSpace::new(1, WarpingSpec::euclidean()).is_err());
}

#[test]
fn curvature_diagnostics() {
    let grid = RadiusGrid::linspace(0.1, 5.0, 50).unwrap();
    let hyp = model(2, "sinh(r)");
    assert!((hyp.max_radial_curvature(&grid).unwrap() + 1.0).abs() < 1e-12);
    assert!((hyp.max_tangential_curvature(&grid).unwrap() + 1.0).abs() < 1e-9);
    let flat = model(3, "r");
    assert_eq!(flat.max_radial_curvature(&grid).unwrap(), 0.0);
    assert_eq!(flat.max_tangential_curvature(&grid).unwrap(), 0.0);
    // Round sphere of curvature 1: both curvatures equal 1.
    let sphere = model(2, "sin(r)");
    let inside = RadiusGrid::linspace(0.1, 3.0, 30).unwrap();
    assert!((sphere.max_tangential_curvature(&inside).unwrap() - 1.0).abs() < 1e-9);
    assert!((sphere.min_radial_curvature(&inside).unwrap() - 1.0).abs() < 1e-12);
}

mod invariants {
    use super::*;
    use proptest::prelude::*;

    fn space_form() -> impl Strategy<Value = ModelSpace> {
        (2usize..5, -2.0f64..=0.0).prop_map(|(m, b)| ModelSpace::new(m, WarpingSpec::space_form(b).unwrap()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn nonpositive_curvature_is_balanced_from_below(w in space_form(), r in 0.01f64..6.0) {
            let product = w.iso_quotient(r, &q()).unwrap() * w.eta(r).unwrap();
            prop_assert!(product >= 1.0 / w.dim() as f64 - 1e-10, "{product}");
        }

        #[test]
        fn volumes_grow_and_capacity_shrinks(w in space_form(), a in 0.1f64..2.0, d in 0.1f64..3.0) {
            let b = a + d;
            prop_assert!(w.vol_ball(b, &q()).unwrap() > w.vol_ball(a, &q()).unwrap());
            prop_assert!(w.vol_sphere(b).unwrap() > w.vol_sphere(a).unwrap());
            prop_assert!(w.capacity_model(a, b + 1.0, &q()).unwrap() < w.capacity_model(a, b, &q()).unwrap());
        }

        #[test]
        fn exit_time_is_positive_and_radially_decreasing(w in space_form(), big in 0.5f64..5.0, s in 0.0f64..0.9) {
            let inner = w.mean_exit_model(big, s * big, &q()).unwrap();
            let outer = w.mean_exit_model(big, (s + 0.1) * big, &q()).unwrap();
            prop_assert!(inner > outer && outer >= 0.0);
            prop_assert!(w.mean_exit_model(big, big, &q()).unwrap().abs() < 1e-12);
        }
    }
}
