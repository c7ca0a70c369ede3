use nlwave::fft::Spectral;
use nlwave::grid::{Field6, Grid2D};
use nlwave::operators::{bilinear_bl, circ_curl, helmholtz_split};
use nlwave::symmetry::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth_coeffs(seed: u64) -> impl Fn(f64) -> [f64; 6] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.5..1.5));
    let wid: [f64; 6] = std::array::from_fn(|_| rng.random_range(1.0..3.0));
    move |r: f64| {
        std::array::from_fn(|c| {
            let g = amp[c] * (-r * r / wid[c]).exp();
            // in-plane coefficients vanish linearly at the origin
            if c % 3 == 2 { g } else { r * g }
        })
    }
}

#[test]
fn identity_and_pi_rotation() {
    let g = Grid2D::<f64>::square(32, 4.0).unwrap();
    let h = g.h();
    let u = Field6::from_fn(g, |x, y| {
        let m = x.hypot(y).max(h);
        [x / m, y / m, 0.0, 0.0, 0.0, 0.0]
    });
    assert_eq!(so2_act(RotationAngle(0.0), &u), u);
    let r = so2_act(RotationAngle(std::f64::consts::PI), &u);
    // the lines i = 0 and j = 0 have no mirror partner inside the box
    for p in 0..g.len() {
        let (i, j) = g.coords_of(p);
        if i == 0 || j == 0 {
            continue;
        }
        for c in 0..6 {
            assert!((r.comps[c][p] - u.comps[c][p]).abs() < 1e-12);
        }
    }
}

fn composition_error(n: usize) -> f64 {
    let g = Grid2D::<f64>::square(n, 12.0).unwrap();
    let u = equivariant_field(g, smooth_coeffs(1)).add(&Field6::from_fn(g, |x, y| {
        let e = (-(x - 1.0).powi(2) - y * y).exp();
        [e, 0.0, e, 0.0, e, 0.0]
    }));
    let a = so2_act(RotationAngle(0.3), &so2_act(RotationAngle(0.5), &u));
    let b = so2_act(RotationAngle(0.8), &u);
    a.sub(&b).max_abs() / u.max_abs()
}

#[test]
fn composition_law_up_to_interpolation() {
    let (e1, e2) = (composition_error(96), composition_error(192));
    assert!(e1 < 0.1 && (e1 / e2 - 4.0).abs() < 1.0, "{e1} {e2}");
    let g = Grid2D::<f64>::square(64, 8.0).unwrap();
    let u = equivariant_field(g, smooth_coeffs(4));
    let mut q = u.clone();
    for _ in 0..4 {
        q = so2_act(RotationAngle(std::f64::consts::FRAC_PI_2), &q);
    }
    assert!(q.sub(&u).max_abs() < 1e-12 * u.max_abs());
}

#[test]
fn pure_fields_decompose() {
    let g = Grid2D::<f64>::square(32, 4.0).unwrap();
    let rho = Field6::from_fn(g, |x, y| {
        let r = x.hypot(y);
        if r == 0.0 { [0.0; 6] } else { [x / r, y / r, 0.0, 0.0, 0.0, 0.0] }
    });
    let s = decompose_rtz(&rho);
    for p in 1..s.alpha_rho.len() {
        assert!((s.alpha_rho.value[p] - 1.0).abs() < 1e-14);
        assert!(s.alpha_tau.value[p].abs() < 1e-14);
        assert!(s.alpha_zeta.value[p].abs() < 1e-14);
    }
    let tau = Field6::from_fn(g, |x, y| {
        let r = x.hypot(y);
        if r == 0.0 { [0.0; 6] } else { [-y / r, x / r, 0.0, 0.0, 0.0, 0.0] }
    });
    let s = decompose_rtz(&tau);
    for p in 1..s.alpha_tau.len() {
        assert!((s.alpha_tau.value[p] - 1.0).abs() < 1e-14);
        assert!(s.alpha_rho.value[p].abs() < 1e-14);
    }
    assert!(project_s(&tau).max_abs() < 1e-14);
    assert!(project_s(&rho).sub(&rho).max_abs() < 1e-15);
}

#[test]
fn round_trip_of_radial_coefficients() {
    let g = Grid2D::<f64>::square(64, 8.0).unwrap();
    let coef = smooth_coeffs(7);
    let u = equivariant_field(g, &coef);
    let s = decompose_rtz(&u);
    assert!(s.recompose().sub(&u).max_abs() < 1e-14);
    for prof in [&s.alpha_rho, &s.alpha_tau, &s.alpha_zeta, &s.talpha_rho, &s.talpha_tau, &s.talpha_zeta] {
        assert!(prof.value.iter().all(|v| v.is_finite()));
    }
    assert_eq!(s.alpha_rho.r[0], 0.0);
    assert_eq!(s.alpha_rho.value[0], 0.0);
    for p in 0..g.len() {
        let r = g.radius(p);
        if r < g.h() {
            continue;
        }
        let (x1, x2) = g.point(p);
        let a = coef(r);
        let ar = (s.u_rho.comps[0][p] * x1 + s.u_rho.comps[1][p] * x2) / r;
        let at = (-s.u_tau.comps[0][p] * x2 + s.u_tau.comps[1][p] * x1) / r;
        assert!((ar - a[0]).abs() < 1e-10 && (at - a[1]).abs() < 1e-10);
        assert!((s.u_zeta.comps[2][p] - a[2]).abs() < 1e-14);
        let tr = (s.tu_rho.comps[3][p] * x1 + s.tu_rho.comps[4][p] * x2) / r;
        assert!((tr - a[3]).abs() < 1e-10);
    }
}

#[test]
fn pointwise_orthogonality_of_parts() {
    let g = Grid2D::<f64>::square(64, 8.0).unwrap();
    let u = equivariant_field(g, smooth_coeffs(3));
    let s = decompose_rtz(&u);
    let rho = s.rho_part();
    for (a, b) in [(&rho, &s.u_tau), (&rho, &s.u_zeta), (&s.u_tau, &s.u_zeta)] {
        assert!(pointwise_inner_residual(a, b) < 1e-15);
    }
}

#[test]
fn curl_orthogonality_with_exact_derivatives() {
    let g = Grid2D::<f64>::square(128, 12.0).unwrap();
    let spec = Spectral::new(&g);
    let k = 1.0;
    let u = equivariant_field(g, smooth_coeffs(11));
    let s = decompose_rtz(&u);
    let c_rho = spectral_curl(&spec, &s.rho_part(), k).unwrap();
    let c_tau = spectral_curl(&spec, &s.u_tau, k).unwrap();
    let c_zeta = spectral_curl(&spec, &s.u_zeta, k).unwrap();
    assert!(pointwise_inner_residual(&c_rho, &c_tau) < 1e-9);
    assert!(pointwise_inner_residual(&c_tau, &c_zeta) < 1e-9);
}

#[test]
fn s_is_an_isometry_of_bl() {
    let g = Grid2D::<f64>::square(64, 8.0).unwrap();
    for seed in 0..4 {
        let u = equivariant_field(g, smooth_coeffs(seed));
        let a = bilinear_bl(&u, &u, 1.0).unwrap();
        let b = bilinear_bl(&apply_s(&u), &apply_s(&u), 1.0).unwrap();
        let c = bilinear_bl(&apply_s_tilde(&u), &apply_s_tilde(&u), 1.0).unwrap();
        assert!((a - b).abs() < 1e-9 * a && (a - c).abs() < 1e-9 * a);
    }
}

#[test]
fn projectors_idempotent_commuting_orthogonal() {
    let g = Grid2D::<f64>::square(32, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = Field6::from_fn(g, |_, _| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    let p = project_s(&u);
    assert!(project_s(&p).sub(&p).max_abs() < 1e-12);
    let pt = project_s_tilde(&u);
    assert!(project_s_tilde(&pt).sub(&pt).max_abs() < 1e-12);
    let ab = project_s_tilde(&project_s(&u));
    let ba = project_s(&project_s_tilde(&u));
    assert!(ab.sub(&ba).max_abs() < 1e-12);
    assert!(p.dot(&u.sub(&p)).abs() < 1e-12 * u.dot(&u));
}

#[test]
fn split_preserves_doubly_fixed_class() {
    let g = Grid2D::<f64>::square(64, 8.0).unwrap();
    let coef = smooth_coeffs(9);
    let u = equivariant_field(g, |r| {
        let a = coef(r);
        [a[0], 0.0, a[2], a[3], 0.0, a[5]]
    });
    let sp = helmholtz_split(&u, 1.0).unwrap();
    // ring averages of the azimuthal parts cancel exactly by mirror symmetry;
    // pointwise they are only O(h²) because difference stencils are not isotropic
    for part in [&sp.w, &sp.v] {
        assert!(decompose_rtz(part).tau_fraction() < 1e-12);
        assert!(project_s(part).sub(part).max_abs() < 0.05 * part.max_abs());
        assert!(project_s_tilde(part).sub(part).max_abs() < 0.05 * part.max_abs());
    }
}

#[test]
fn symmetrization_of_constant_field() {
    let g = Grid2D::<f64>::square(32, 4.0).unwrap();
    let u = Field6::from_fn(g, |_, _| [1.0, 0.0, 0.5, 0.0, 0.0, 0.0]);
    let s = symmetrize_so2(&u, 64).unwrap();
    for p in 0..g.len() {
        assert!(s.comps[0][p].abs() < 1e-12 && s.comps[1][p].abs() < 1e-12);
        assert!((s.comps[2][p] - 0.5).abs() < 1e-12);
    }
    assert!(symmetrize_so2(&u, 4).is_err());
}

#[test]
fn symmetrization_converges_in_m() {
    let g = Grid2D::<f64>::square(64, 8.0).unwrap();
    let u = Field6::from_fn(g, |x, y| {
        let e = (-(x - 1.0).powi(2) - (y + 0.5).powi(2)).exp();
        [e, 0.5 * e, e, 0.0, e, 0.2 * e]
    });
    let a = symmetrize_so2(&u, 64).unwrap();
    let b = symmetrize_so2(&u, 128).unwrap();
    assert!(a.sub(&b).max_abs() < 1e-2 * a.max_abs());
    let eq = equivariant_field(g, smooth_coeffs(2));
    assert!(symmetrize_so2(&eq, 32).unwrap().sub(&eq).max_abs() < 5e-2 * eq.max_abs());
}

#[test]
fn d4_average_is_exact_projection() {
    let g = Grid2D::<f64>::square(32, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = Field6::from_fn(g, |_, _| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    let s = symmetrize_d4(&u).unwrap();
    assert!(symmetrize_d4(&s).unwrap().sub(&s).max_abs() < 1e-14);
    assert!(rot90(&s, 1).unwrap().sub(&s).max_abs() < 1e-14);
    let c = circ_curl(&s, 1.0).unwrap();
    assert!(c.is_finite());
}
