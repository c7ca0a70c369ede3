use std::sync::OnceLock;

use nlwave::grid::Grid2D;
use nlwave::operators::divergences;
use nlwave::symmetry::{decompose_rtz, radial_bin};
use nlwave::te_ode::*;
use nlwave::Error;

fn solutions() -> &'static Vec<NodalSolution<f64>> {
    static S: OnceLock<Vec<NodalSolution<f64>>> = OnceLock::new();
    S.get_or_init(|| {
        let p = ShootingProblem::default();
        (1..=3).map(|n| find_nodal(n, &p).unwrap()).collect()
    })
}

fn bessel_i1(x: f64) -> f64 {
    let mut term = x / 2.0;
    let mut sum = term;
    for k in 1..60 {
        term *= (x / 2.0).powi(2) / (k as f64 * (k + 1) as f64);
        sum += term;
    }
    sum
}

#[test]
fn nodal_solutions_have_exact_counts() {
    for (i, s) in solutions().iter().enumerate() {
        let n = i + 1;
        assert_eq!(s.zeros, n);
        assert_eq!(s.deriv_zeros, n + 1);
        assert!(s.residual < 1e-7, "n = {n}: residual {}", s.residual);
        assert!(s.beta(s.r_max - 1e-9).abs() < 1e-8);
        assert_eq!(s.branches.len(), 1);
    }
    // more zeros need a steeper start
    let sl: Vec<f64> = solutions().iter().map(|s| s.slope_star).collect();
    assert!(sl[0] < sl[1] && sl[1] < sl[2]);
}

#[test]
fn zeros_are_simple_and_ordered() {
    for s in solutions() {
        let z = &s.zero_locations;
        assert!(z.windows(2).all(|w| w[1] - w[0] > 0.5));
        for &r in z {
            let (b, db, _) = s.trajectory.eval(r);
            assert!(b.abs() < 1e-9 && db.abs() > 1e-3);
        }
    }
}

#[test]
fn slope_is_stable_under_tolerance_halving() {
    let base = ShootingProblem::<f64>::default();
    let half = ShootingProblem::<f64> { rtol: base.rtol / 2.0, atol: base.atol / 2.0, ..base };
    let a = &solutions()[0];
    let b = find_nodal(1, &half).unwrap();
    assert!(((a.slope_star - b.slope_star) / a.slope_star).abs() < 1e-6);
}

#[test]
fn tail_decays_like_k1() {
    let s = &solutions()[1];
    // r^{1/2} e^r β is nearly constant once K1 dominates
    let g = |r: f64| r.sqrt() * r.exp() * s.beta(r);
    let (a, b) = (g(18.0), g(26.0));
    assert!(((a - b) / b).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn linear_equation_matches_bessel_i1() {
    let p = ShootingProblem { cubic: 0.0, ..ShootingProblem::default() };
    let t = integrate_te(0.7, &p).unwrap();
    for r in [1.0, 5.0, 8.0] {
        let exact = 1.4 * bessel_i1(r);
        let (b, _, _) = t.eval(r);
        assert!(((b - exact) / exact).abs() < 1e-8, "r = {r}: {b} vs {exact}");
    }
}

#[test]
fn linear_equation_has_no_nodal_solution() {
    let p = ShootingProblem { cubic: 0.0, scan_points: 200, ..ShootingProblem::default() };
    match find_nodal(1, &p) {
        Err(Error::Search { log, .. }) => assert!(!log.is_empty()),
        other => panic!("expected a search failure, got {other:?}"),
    }
}

#[test]
fn trajectories_are_odd_in_slope() {
    let p = ShootingProblem::<f64>::default();
    let a = integrate_te(1.7, &p).unwrap();
    let b = integrate_te(-1.7, &p).unwrap();
    assert_eq!(a.len(), b.len());
    assert!(a.beta.iter().zip(&b.beta).all(|(x, y)| (x + y).abs() <= 1e-12 * x.abs().max(1.0)));
    let z = integrate_te(0.0, &p).unwrap();
    assert!(z.beta.iter().all(|&x| x == 0.0));
}

#[test]
fn zero_counter_on_sine() {
    let r: Vec<f64> = (0..=200).map(|i| 0.1 + i as f64 * 0.05).collect();
    let t = Trajectory::from_samples(
        r.clone(),
        r.iter().map(|x| x.sin()).collect(),
        r.iter().map(|x| x.cos()).collect(),
        r.iter().map(|x| -x.sin()).collect(),
    )
    .unwrap();
    assert_eq!(count_sign_changes(&t), 3);
    for (k, z) in t.zeros().iter().enumerate() {
        assert!((z - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-8);
    }
}

#[test]
fn finite_difference_slope_is_second_order() {
    let s = &solutions()[0];
    let p = ShootingProblem::default();
    let e: Vec<f64> = [1500, 3000, 6000].iter().map(|&m| fd_bvp(s, &p, m).unwrap().0 - s.slope_star).collect();
    let (r1, r2) = (e[0] / e[1], e[1] / e[2]);
    assert!((r1 - 4.0).abs() < 0.4 && (r2 - 4.0).abs() < 0.4, "ratios {r1} {r2}");
}

#[test]
fn short_domain_is_rejected() {
    let p = ShootingProblem { r_max: 15.0, ..ShootingProblem::default() };
    assert!(matches!(integrate_te(1.0, &p), Err(Error::Config(_))));
}

#[test]
fn stream_function_lift_is_divergence_free() {
    let s = &solutions()[0];
    let g = Grid2D::square(128, 12.0).unwrap();
    let u = te_field_from_profile(s, g, TeLift::StreamFunction).unwrap();
    let (a, b) = divergences(&u, 1.0);
    let m = u.max_abs();
    assert!(a.iter().chain(&b).all(|v| v.abs() < 1e-12 * m));
}

#[test]
fn pointwise_lift_is_purely_azimuthal() {
    let g = Grid2D::square(128, 6.0).unwrap();
    let beta = |r: f64| r * (-r * r).exp();
    let u = te_field_from_fn(beta, g, 30.0, TeLift::Pointwise).unwrap();
    let d = decompose_rtz(&u);
    let samples: Vec<f64> = (0..g.len()).map(|p| beta(g.radius(p))).collect();
    let expected = radial_bin(&g, &samples);
    // the origin ring is extrapolated, compare the rest
    for (a, e) in d.alpha_tau.value.iter().zip(&expected.value).skip(1) {
        assert!((a - e).abs() < 1e-8, "{a} vs {e}");
    }
    assert!(d.alpha_rho.max_abs() < 1e-12 && d.alpha_zeta.max_abs() < 1e-12);
    assert!(d.u_tau.sub(&u).max_abs() < 1e-14);
}

#[test]
fn grid_beyond_profile_is_rejected() {
    let s = &solutions()[0];
    let g = Grid2D::square(64, 25.0).unwrap();
    assert!(matches!(te_field_from_profile(s, g, TeLift::Pointwise), Err(Error::Config(_))));
}
