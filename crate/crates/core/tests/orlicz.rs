use nlwave::grid::{Field6, Grid2D};
use nlwave::orlicz::*;
use proptest::prelude::*;

fn builtins() -> Vec<Nonlinearity<f64>> {
    vec![
        make_kerr_nonlinearity(1.0, 1.0).unwrap(),
        make_kerr_nonlinearity(2.5, 0.3).unwrap(),
        make_power_nonlinearity(2.5).unwrap(),
        make_power_nonlinearity(3.0).unwrap(),
        make_power_nonlinearity(6.0).unwrap(),
        make_logtype_nonlinearity(3.0, 4.0).unwrap(),
        make_logtype_nonlinearity(2.5, 5.0).unwrap(),
    ]
}

fn nfunctions() -> Vec<NFunction<f64>> {
    vec![
        NFunction::power(1.5, PowerScale::OverP).unwrap(),
        NFunction::power(3.0, PowerScale::Unit).unwrap(),
        NFunction::kerr(),
        NFunction::log_type(3.0, 4.0).unwrap(),
    ]
}

#[test]
fn power_complement_has_conjugate_exponent() {
    for p in [1.5f64, 2.0, 3.0, 4.5] {
        let nf = NFunction::power(p, PowerScale::OverP).unwrap();
        let q = p / (p - 1.0);
        for s in log_grid(1e-3f64, 1e3, 25) {
            let want = s.powf(q) / q;
            let got = complementary(&nf, s).unwrap();
            assert!((got - want).abs() <= 1e-12 * want, "p={p} s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn double_legendre_is_identity() {
    for nf in nfunctions() {
        let psi = nf.complementary();
        for t in log_grid(1e-2f64, 1e2, 17) {
            let back = complementary(&psi, t).unwrap();
            let phi = nf.eval(t).unwrap();
            assert!((back - phi).abs() <= 1e-6 * phi, "{:?} t={t}: {back} vs {phi}", nf.kind);
        }
    }
}

#[test]
fn power_delta2_constants_are_exact() {
    for p in [1.5f64, 2.0, 3.0, 7.0] {
        for scale in [PowerScale::OverP, PowerScale::Unit] {
            let nf = NFunction::power(p, scale).unwrap();
            let d = check_delta2(&nf, &default_condition_grid()).unwrap();
            assert!(d.holds);
            assert!((d.k_const - 2f64.powf(p)).abs() <= 1e-10 * d.k_const);
            assert!((d.kappa - p).abs() <= 1e-10 * p);
            let n = check_nabla2(&nf, &default_condition_grid()).unwrap();
            assert!(n.holds && (n.kappa_prime - p).abs() <= 1e-10 * p);
        }
    }
}

#[test]
fn luxemburg_norm_of_unit_power_is_lp_norm() {
    let g = Grid2D::square(32, 4.0).unwrap();
    let u = Field6::from_fn(g, |x: f64, y: f64| {
        let e = (-(x * x + 2.0 * y * y) / 3.0).exp();
        [e, x * e, 0.0, y * e, -0.5 * e, x * y * e]
    });
    for p in [1.5f64, 2.0, 3.0, 4.0] {
        let nf = NFunction::power(p, PowerScale::Unit).unwrap();
        let lp = (u.pointwise_norm().iter().map(|m| m.powf(p)).sum::<f64>() * g.cell_area()).powf(1.0 / p);
        let lux = luxemburg_norm(&nf, &u).unwrap();
        assert!((lux - lp).abs() <= 1e-8 * lp, "p={p}: {lux} vs {lp}");
    }
}

#[test]
fn builtins_satisfy_structural_conditions() {
    for nl in builtins() {
        let r = check_f_conditions(&nl, 4000, 7).unwrap();
        assert!(r.all(), "{:?}: {r:?}", nl.kind);
        assert!(r.ar_gap_min > -1e-12);
        let d = check_delta2(&nl.phi, &default_condition_grid()).unwrap();
        let n = check_nabla2(&nl.phi, &default_condition_grid()).unwrap();
        assert!(d.holds && n.holds, "{:?}", nl.kind);
    }
}

#[test]
fn growth_sandwich_bounds_phi() {
    for nf in nfunctions() {
        let (c, p) = growth_sandwich(&nf).unwrap();
        for t in log_grid(1e-4f64, 1e4, 80) {
            assert!(nf.eval(t).unwrap() <= c * (t * t + t.powf(p)) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn log_type_derivative_matches_difference_quotient() {
    let nf = NFunction::log_type(3.0, 4.0).unwrap();
    for t in [0.3f64, 0.999, 1.001, 2.0, 10.0] {
        let h = 1e-5 * t;
        let fd = (nf.eval(t + h).unwrap() - nf.eval(t - h).unwrap()) / (2.0 * h);
        let d = nf.deriv(t).unwrap();
        assert!((fd - d).abs() <= 1e-7 * d, "t={t}: {fd} vs {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn young_identity_holds(t in 1e-3..1e3f64, which in 0usize..4) {
        let nf = &nfunctions()[which];
        let d = nf.deriv(t).unwrap();
        let lhs = complementary(nf, d).unwrap();
        let rhs = t * d - nf.eval(t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + t * d));
    }

    #[test]
    fn young_inequality_holds(t in 1e-3..1e2f64, s in 1e-3..1e2f64, which in 0usize..4) {
        let nf = &nfunctions()[which];
        let bound = nf.eval(t).unwrap() + complementary(nf, s).unwrap();
        prop_assert!(s * t <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn luxemburg_norm_is_homogeneous(c in 0.01..100.0f64, which in 0usize..4) {
        let g = Grid2D::square(16, 3.0).unwrap();
        let u = Field6::from_fn(g, |x: f64, y: f64| {
            let e = (-(x * x + y * y)).exp();
            [e, 0.0, x * e, 0.0, y * e, 0.3 * e]
        });
        let nf = &nfunctions()[which];
        let a = luxemburg_norm(nf, &u).unwrap();
        let b = luxemburg_norm(nf, &u.scaled(c)).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-10 * c * a);
    }

    #[test]
    fn kerr_term_is_quartic(u in prop::array::uniform6(-3.0..3.0f64), w in 0.2..3.0f64, chi in 0.1..2.0f64) {
        let nl = make_kerr_nonlinearity(w, chi).unwrap();
        let m2: f64 = u.iter().map(|x| x * x).sum();
        let f = nl.big_f(&u);
        prop_assert!((f - w * w * chi * m2 * m2 / 8.0).abs() <= 1e-12 * (1.0 + f));
        let fu: f64 = nl.f(&u).iter().zip(&u).map(|(a, b)| a * b).sum();
        prop_assert!((fu - 4.0 * f).abs() <= 1e-12 * (1.0 + fu));
    }
}
