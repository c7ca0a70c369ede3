use nalgebra::{DMatrix, DVector};
use nlwave::grid::{Field6, Grid2D, ScalarPair};
use nlwave::operators::{circ_grad, circ_grad_adjoint};
use nlwave::orlicz::{make_kerr_nonlinearity, Nonlinearity};
use nlwave::symmetry::{reflect, rot90, symmetrize_d4};
use nlwave::variational::*;
use nlwave::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kerr(chi3: f64) -> Nonlinearity<f64> {
    make_kerr_nonlinearity(1.0, chi3).unwrap()
}

fn problem(n: usize, r: f64, chi3: f64) -> TmProblem<f64> {
    let g = Grid2D::square(n, r).unwrap();
    TmProblem::new(g, 1.0, 1.0, PermittivityKind::Bump { a: 0.4, b: 0.3 }, kerr(chi3)).unwrap()
}

fn random_field(g: Grid2D<f64>, seed: u64) -> Field6<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field6::from_fn(g, |x: f64, y: f64| {
        let e = (-(x * x + y * y) / 3.0).exp();
        std::array::from_fn(|i| e * (c[3 * i] + c[3 * i + 1] * x + c[3 * i + 2] * y))
    })
}

fn random_pair(g: Grid2D<f64>, seed: u64) -> ScalarPair<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    ScalarPair::from_fn(g, |x: f64, y: f64| {
        let e = (-(x * x + y * y) / 4.0).exp();
        (e * (c[0] + c[1] * x), e * (c[2] + c[3] * x * y))
    })
}

#[test]
fn action_vanishes_at_zero_and_is_negative_on_the_kernel() {
    let prob = problem(24, 6.0, 1.0);
    assert_eq!(action_j(&prob, &Field6::zeros(prob.grid)).unwrap(), 0.0);
    let w = circ_grad(&random_pair(prob.grid, 1), 1.0).unwrap();
    assert!(action_j(&prob, &w).unwrap() < 0.0);
}

#[test]
fn gradient_matches_central_differences() {
    let prob = problem(24, 6.0, 1.0);
    for seed in 0..4 {
        let u = random_field(prob.grid, seed);
        let phi = random_field(prob.grid, seed + 100);
        let d = 1e-5;
        let fd = (action_j(&prob, &u.add(&phi.scaled(d))).unwrap() - action_j(&prob, &u.sub(&phi.scaled(d))).unwrap())
            / (2.0 * d);
        let an = grad_j(&prob, &u).unwrap().dot(&phi);
        assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "fd {fd} vs {an}");
    }
}

#[test]
fn inner_problem_is_trivial_at_zero() {
    let prob = problem(24, 6.0, 1.0);
    let (w, p) = inner_minimize(&prob, &Field6::zeros(prob.grid), 1e-10).unwrap();
    assert_eq!(w.max_abs(), 0.0);
    assert_eq!(p.max_abs(), 0.0);
}

#[test]
fn inner_minimizer_is_unique_across_starts() {
    let prob = problem(32, 6.0, 1.0);
    let v = prob.project_v(&random_field(prob.grid, 7).scaled(2.0)).unwrap();
    let opts = InnerOptions { tol: 1e-10, ..InnerOptions::default() };
    let sols: Vec<InnerSolution<f64>> = (0..5)
        .map(|s| {
            let p0 = random_pair(prob.grid, 50 + s);
            let mut p0s = ScalarPair::zeros(prob.grid);
            p0s.axpy(3.0, &p0);
            inner_minimize_from(&prob, &v, p0s, &opts).unwrap()
        })
        .collect();
    for s in &sols {
        assert!(s.kkt < 1e-8);
        assert!(kkt_residual(&prob, &s.u) < 1e-8);
        let spread = s.w.sub(&sols[0].w).max_abs() / sols[0].w.max_abs();
        assert!(spread < 1e-9, "spread {spread}");
    }
}

// In the χ3 → 0 limit the inner problem is the linear system
// ∇̊ᵀV∇̊ p = -∇̊ᵀV v, solved here densely.
#[test]
fn inner_problem_matches_dense_linear_solve() {
    let prob = problem(16, 4.0, 1e-14);
    let g = prob.grid;
    let n = g.len();
    let v = prob.project_v(&random_field(g, 9)).unwrap();
    let apply = |p: &ScalarPair<f64>| {
        let w = circ_grad(p, 1.0).unwrap();
        let vw = w.mul_scalar_field(&prob.permittivity.values);
        circ_grad_adjoint(&vw, 1.0)
    };
    let flat = |p: &ScalarPair<f64>| DVector::from_iterator(2 * n, p.a.iter().chain(&p.at).copied());
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        let mut e = vec![0.0; 2 * n];
        e[j] = 1.0;
        let p = ScalarPair::new(g, e[..n].to_vec(), e[n..].to_vec()).unwrap();
        m.set_column(j, &flat(&apply(&p)));
    }
    let rhs = -flat(&circ_grad_adjoint(&v.mul_scalar_field(&prob.permittivity.values), 1.0));
    let x = m.lu().solve(&rhs).unwrap();
    let p = ScalarPair::new(g, x.as_slice()[..n].to_vec(), x.as_slice()[n..].to_vec()).unwrap();
    let w_dense = circ_grad(&p, 1.0).unwrap();
    let (w, _) = inner_minimize(&prob, &v, 1e-12).unwrap();
    let err = w.sub(&w_dense).max_abs() / w_dense.max_abs();
    assert!(err < 1e-8, "relative difference {err}");
}

#[test]
fn reduced_gradient_obeys_the_envelope_identity() {
    let prob = problem(24, 6.0, 1.0);
    let v = prob.project_v(&random_field(prob.grid, 11).scaled(1.5)).unwrap();
    let phi = prob.project_v(&random_field(prob.grid, 12)).unwrap();
    let g = reduced_grad(&prob, &v).unwrap();
    let an = g.dot(&phi);
    let err = |d: f64| {
        let jp = reduced_j(&prob, &v.add(&phi.scaled(d))).unwrap();
        let jm = reduced_j(&prob, &v.sub(&phi.scaled(d))).unwrap();
        ((jp - jm) / (2.0 * d) - an).abs()
    };
    let (e1, e2) = (err(2e-3), err(1e-3));
    assert!(err(2e-4) < 1e-6 * an.abs().max(1.0));
    let order = (e1 / e2).log2();
    assert!((1.7..2.3).contains(&order), "order {order} from {e1:e}, {e2:e}");
}

#[test]
fn small_sphere_positive_and_rays_decreasing() {
    let prob = problem(32, 8.0, 1.0);
    for seed in 0..6 {
        let dir = class_seed(&prob, seed as usize % 2, seed).unwrap();
        let dir = dir.scaled(1.0 / dir.max_abs());
        let j0 = reduced_j(&prob, &dir.scaled(0.2)).unwrap();
        let vals: Vec<f64> = [8.0, 16.0, 32.0, 64.0].iter().map(|&t| reduced_j(&prob, &dir.scaled(t)).unwrap()).collect();
        assert!(j0 > 0.0);
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        assert!(vals[3] < 0.0);
    }
}

#[test]
fn solver_steps_stay_in_the_class() {
    let prob = problem(32, 6.0, 1.0);
    let v = symmetrize_d4(&class_seed(&prob, 1, 3).unwrap().scaled(3.0)).unwrap();
    assert!(TmProblem::in_class(&v));
    let ev = reduced_eval(&prob, &v, None, &InnerOptions::default()).unwrap();
    for f in [&ev.state.u, &ev.state.w, &ev.grad, &ev.residual] {
        assert!(TmProblem::in_class(f));
        let d4 = symmetrize_d4(f).unwrap().sub(f).max_abs();
        assert!(d4 < 1e-10 * f.max_abs().max(1.0), "D4 drift {d4}");
        assert!(reflect(f).unwrap().sub(f).max_abs() < 1e-10 * f.max_abs().max(1.0));
        assert!(rot90(f, 1).unwrap().sub(f).max_abs() < 1e-10 * f.max_abs().max(1.0));
    }
    let lp = prob.low_pass(&ev.grad);
    assert!(TmProblem::in_class(&lp));
}

#[test]
fn low_pass_is_a_projection_commuting_with_the_split() {
    let prob = problem(32, 6.0, 1.0);
    let u = random_field(prob.grid, 13);
    let a = prob.low_pass(&u);
    assert!(a.sub(&prob.low_pass(&a)).max_abs() < 1e-12);
    assert!(prob.spectral_tail(&a) < 1e-24);
    let b = prob.project_v(&a).unwrap();
    let c = prob.low_pass(&prob.project_v(&u).unwrap());
    assert!(b.sub(&c).max_abs() < 1e-12);
    let checker = Field6::from_fn(prob.grid, |x: f64, y: f64| {
        let s = ((x / prob.grid.h()).round() + (y / prob.grid.h()).round()) as i64;
        let c = if s % 2 == 0 { 1.0 } else { -1.0 };
        [c, 0.0, 0.0, 0.0, 0.0, 0.0]
    });
    assert!(prob.spectral_tail(&checker) > 1.0 - 1e-12);
}

#[test]
fn assumption_v_is_enforced() {
    let g = Grid2D::square(16, 4.0).unwrap();
    for kind in [
        PermittivityKind::Constant { value: 1.0 },
        PermittivityKind::Constant { value: 0.0 },
        PermittivityKind::Bump { a: 0.5, b: 0.6 },
        PermittivityKind::Bump { a: 0.5, b: -0.6 },
    ] {
        match TmProblem::new(g, 1.0, 1.0, kind, kerr(1.0)) {
            Err(Error::Config(msg)) => assert!(msg.contains("assumption (V)"), "{msg}"),
            other => panic!("expected rejection, got {other:?}"),
        }
    }
    assert!(TmProblem::new(g, 1.0, 1.0, PermittivityKind::Constant { value: 0.99 }, kerr(1.0)).is_ok());
    assert!(TmProblem::new(g, 0.0, 1.0, PermittivityKind::Constant { value: 0.5 }, kerr(1.0)).is_err());
}

#[test]
fn cerami_residual_vanishes_at_zero_only() {
    let prob = problem(24, 6.0, 1.0);
    assert_eq!(cerami_residual(&prob, &Field6::zeros(prob.grid)).unwrap(), 0.0);
    let v = class_seed(&prob, 0, 0).unwrap();
    let a = cerami_residual(&prob, &v).unwrap();
    let b = cerami_residual(&prob, &v.scaled(1.0 + 1e-6)).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-4 * a);
}

#[test]
fn seeds_are_deterministic() {
    let prob = problem(24, 6.0, 1.0);
    let a = class_seed(&prob, 2, 42).unwrap();
    let b = class_seed(&prob, 2, 42).unwrap();
    let c = class_seed(&prob, 2, 43).unwrap();
    assert_eq!(a, b);
    assert!(a.sub(&c).max_abs() > 1e-6);
    assert!((prob.norm(&a) - 1.0).abs() < 1e-12);
    assert!(prob.spectral_tail(&a) < 1e-24);
}

// L and V are linear and f_λ(u/√λ) = f_1(u)/√λ
#[test]
fn kerr_scaling_law_holds_for_the_gradient() {
    let g = Grid2D::square(24, 6.0).unwrap();
    let u = random_field(g, 21).scaled(2.0);
    let p1 = TmProblem::new(g, 1.0, 1.0, PermittivityKind::Constant { value: 0.5 }, kerr(1.0)).unwrap();
    for lambda in [0.5, 2.0] {
        let pl = TmProblem::new(g, 1.0, 1.0, PermittivityKind::Constant { value: 0.5 }, kerr(lambda)).unwrap();
        let ul = kerr_rescale(&u, lambda).unwrap();
        let lhs = grad_j(&pl, &ul).unwrap();
        let rhs = grad_j(&p1, &u).unwrap().scaled(1.0 / lambda.sqrt());
        assert!(lhs.sub(&rhs).max_abs() < 1e-12 * rhs.max_abs());
        let jl = action_j(&pl, &ul).unwrap();
        assert!((jl - action_j(&p1, &u).unwrap() / lambda).abs() < 1e-12 * jl.abs());
    }
    assert!(kerr_rescale(&u, 0.0).is_err());
}

#[test]
fn higher_state_search_needs_two_states() {
    let prob = problem(16, 4.0, 1.0);
    assert!(matches!(higher_state_search(&prob, &SolverOptions::default(), 1), Err(Error::Config(_))));
}

// a coarse box keeps this fast; the state is a genuine discrete critical point
#[test]
fn mountain_pass_finds_a_certified_state() {
    let g = Grid2D::square(64, 12.0).unwrap();
    let prob = TmProblem::new(g, 1.0, 1.0, PermittivityKind::Constant { value: 0.5 }, kerr(1.0)).unwrap();
    let cp = mountain_pass_search(&prob, &SolverOptions::default()).unwrap();
    assert!(cp.certified, "{:?}", cp.log);
    assert!(cp.action > 0.0);
    assert!(cp.maxwell_residual < 1e-10);
    assert!(cp.tau_fraction < 1e-6);
    assert!(cp.lattice_symmetry < 1e-12);
    // Newton from a perturbation comes back
    let pert = cp.state.u.add(&prob.low_pass(&random_field(g, 5)).scaled(1e-3 * cp.state.u.max_abs()));
    let pert = prob.project_v(&pert).unwrap().add(&prob.project_w(&cp.state.u).unwrap());
    let nr = newton_polish(&prob, &pert, &[], &SolverOptions::default()).unwrap();
    let back = certify(&prob, &nr.u, &SolverOptions::default(), "again", vec![]).unwrap();
    assert!((back.action - cp.action).abs() < 1e-9 * cp.action);
}
