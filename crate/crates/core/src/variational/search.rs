//! Critical-point searches on the reduced functional and their certification.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field6, RadialProfile, ScalarPair};
use crate::krylov::minres;
use crate::operators::{apply_l, circ_curl};
use crate::symmetry::{decompose_rtz, reflect, rot90, symmetrize_d4};
use crate::Real;

use super::{action_j, grad_j, reduced_eval, InnerOptions, ReducedEval, StateDecomp, TmProblem};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Certification bound on `‖J̃'(v)‖ / max(1, ‖v‖)`.
    pub tol: T,
    pub inner: InnerOptions<T>,
    /// Path deformations or minimax steps.
    pub max_iter: usize,
    pub seed: u64,
    pub states: usize,
    pub path_points: usize,
    /// Relative reduced gradient at which a minimax search hands over to Newton.
    pub switch_tol: T,
    /// Target for `‖Lu - Vu - f(u)‖ / ‖u‖`.
    pub newton_tol: T,
    pub newton_max: usize,
    pub minres_max: usize,
    pub deflation_shift: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            inner: InnerOptions::default(),
            max_iter: 400,
            seed: 0,
            states: 2,
            path_points: 12,
            switch_tol: T::lit(5e-3),
            newton_tol: T::lit(1e-11),
            newton_max: 40,
            minres_max: 2000,
            deflation_shift: T::one(),
        }
    }
}

/// Radial coefficient functions read off a state.
#[derive(Debug, Clone)]
pub struct StateProfiles<T> {
    pub alpha: RadialProfile<T>,
    pub gamma: RadialProfile<T>,
    pub alpha_tilde: RadialProfile<T>,
    pub gamma_tilde: RadialProfile<T>,
}

#[derive(Debug, Clone)]
pub struct CriticalPoint<T> {
    pub label: String,
    pub state: StateDecomp<T>,
    pub action: T,
    /// Dual norm of the reduced gradient.
    pub grad_norm: T,
    pub v_norm: T,
    pub cerami_residual: T,
    /// `‖Lu - Vu - f(u)‖₂ / ‖u‖₂`.
    pub maxwell_residual: T,
    pub kkt: T,
    pub tau_fraction: T,
    /// Share of `‖u‖²` outside the resolved band.
    pub spectral_tail: T,
    /// Largest deviation from quarter-turn and mirror invariance, relative to `max|u|`.
    pub lattice_symmetry: T,
    pub profiles: StateProfiles<T>,
    /// `½(1 + 1/ω²)‖∇̊×u‖²`.
    pub energy_bound: T,
    pub certified: bool,
    pub log: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<T> {
    pub states: Vec<CriticalPoint<T>>,
    pub log: Vec<String>,
}

/// A field of the solver class with radial coefficients having `nodes`
/// sign changes, band-limited, projected onto `V` and scaled to unit norm.
pub fn class_seed<T: Real>(prob: &TmProblem<T>, nodes: usize, seed: u64) -> Result<Field6<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = T::lit(2.5 * rng.random_range(0.9..1.1));
    let amp_a = T::lit(rng.random_range(0.8..1.2));
    let amp_g = T::lit(rng.random_range(0.3..0.7));
    let roots: Vec<T> = (1..=nodes).map(|j| sigma * T::lit(0.9 * (j as f64).sqrt())).collect();
    let shape = |r: T| {
        let mut s = (-r * r / (sigma * sigma)).exp();
        for &q in &roots {
            s = s * (T::one() - r * r / (q * q));
        }
        s
    };
    let u = Field6::from_fn(prob.grid, |x1, x2| {
        let r = x1.hypot(x2);
        let a = amp_a * shape(r);
        let z = T::zero();
        [a * x1, a * x2, z, z, z, amp_g * shape(r)]
    });
    let v = prob.project_v(&prob.low_pass(&u))?;
    let n = prob.norm(&v);
    Ok(v.scaled(T::one() / n))
}

// searches move only inside the resolved band; the doubled copy of the
// spectrum carries spurious low-action states
fn sobolev<T: Real>(prob: &TmProblem<T>, grad: &Field6<T>) -> (Field6<T>, T) {
    let grad = prob.low_pass(grad);
    let g = prob.shifted_inverse(&grad, prob.k * prob.k);
    let dn = grad.dot(&g).max(T::zero()).sqrt();
    (g, dn)
}

fn eval<T: Real>(prob: &TmProblem<T>, v: &Field6<T>, warm: Option<&ScalarPair<T>>, opts: &SolverOptions<T>) -> Result<ReducedEval<T>> {
    reduced_eval(prob, v, warm, &opts.inner)
}

/// Mountain pass over ray paths. The path from 0 to a point `e` of negative
/// action is the segment through a direction `d`, sampled at
/// `path_points` nodes; its highest point is moved by steepest descent in
/// the norm of `V` and the path is redrawn through the moved point. Along
/// each ray of the class `J̃` has a single maximum, so the path maximum is
/// the ray peak. The approximate saddle is polished by Newton's method.
pub fn mountain_pass_search<T: Real>(prob: &TmProblem<T>, opts: &SolverOptions<T>) -> Result<CriticalPoint<T>> {
    let mut log = Vec::new();
    let dir = class_seed(prob, 0, opts.seed)?;
    let mut t = T::one();
    let end = loop {
        let ev = eval(prob, &dir.scaled(t), None, opts)?;
        if ev.value < T::zero() {
            break ev;
        }
        t = t * T::two();
        if t > T::lit(1e8) {
            return Err(Error::Search { msg: "no point of negative action along the seed ray".into(), log });
        }
    };
    log.push(format!("endpoint at ray scale {t}, J = {:e}", end.value));
    let np = opts.path_points.max(4);
    let mut best = (T::zero(), T::zero());
    for i in 1..np {
        let s = t * T::from_usize_lossy(i) / T::from_usize_lossy(np);
        let j = eval(prob, &dir.scaled(s), None, opts)?.value;
        if j > best.0 {
            best = (j, s);
        }
    }
    if best.0 <= T::zero() {
        return Err(Error::Search { msg: "path from 0 to the endpoint has no positive node".into(), log });
    }
    log.push(format!("path maximum J = {:e} at ray scale {:e}", best.0, best.1));
    let guess = match minimax(prob, &[], &dir, best.1, opts, &mut log) {
        Ok(u) => u,
        Err(e) => {
            log.push(format!("path deformation failed: {e}"));
            return Err(Error::Search { msg: "mountain pass did not reach a critical point".into(), log });
        }
    };
    let nr = match newton_polish(prob, &guess, &[], opts) {
        Ok(nr) => nr,
        Err(e) => {
            log.push(format!("Newton polish failed: {e}"));
            return Err(Error::Search { msg: "mountain pass did not reach a critical point".into(), log });
        }
    };
    log.push(format!("Newton: {} iterations, residual {:e}", nr.iterations, nr.residual));
    certify(prob, &nr.u, opts, "mountain pass", log)
}

#[derive(Debug, Clone)]
pub struct NewtonReport<T> {
    pub u: Field6<T>,
    pub iterations: usize,
    pub residual: T,
    pub trace: Vec<T>,
}

fn deflation<T: Real>(u: &Field6<T>, known: &[Field6<T>], shift: T) -> (T, Field6<T>) {
    // returns m(u) and ∇ ln m(u)
    let mut m = T::one();
    let mut grad = Field6::zeros(*u.grid());
    for k in known {
        let s2 = k.dot(k).max(T::min_positive_value());
        for sign in [T::one(), -T::one()] {
            let mut d = u.clone();
            d.axpy(-sign, k);
            let q = d.dot(&d) / s2;
            let a = T::one() / q + shift;
            m = m * a;
            // d ln a = -(1/q²)(2 d / s2) / a
            grad.axpy(-T::two() / (q * q * s2 * a), &d);
        }
    }
    (m, grad)
}

/// Newton's method on `Lu - Vu - f(u) = 0` with preconditioned MINRES.
///
/// The preconditioner is `(-Δ_d + k² - V̄)⁻¹` on `V` and `1/(V̄ + f̄)` on the
/// kernel, a positive definite stand-in for `|L - V - f'(u)|`. With
/// `known` nonempty each step is deflated away from those states and their
/// negatives.
pub fn newton_polish<T: Real>(
    prob: &TmProblem<T>,
    u0: &Field6<T>,
    known: &[Field6<T>],
    opts: &SolverOptions<T>,
) -> Result<NewtonReport<T>> {
    let k = prob.k;
    let vbar = prob.permittivity.mean();
    let shift_v = k * k - vbar;
    let mut u = symmetrize_d4(u0)?;
    let mut trace = Vec::new();
    let residual = |u: &Field6<T>| grad_j(prob, u);
    let cw = |u: &Field6<T>| {
        let mags = u.pointwise_norm();
        prob.permittivity.values.iter().zip(&mags).fold(T::zero(), |a, (&v, &m)| a + v + prob.nonlinearity.ratio(m))
            / T::from_usize_lossy(mags.len())
    };
    let precond = |r: &Field6<T>, c: T| -> Field6<T> {
        let sp = prob.split(r).expect("same grid");
        let mut out = prob.shifted_inverse(&sp.v, shift_v);
        out.axpy(T::one() / c, &sp.w);
        out
    };
    let merit = |r: &Field6<T>, c: T, m: T| m * m * r.dot(&precond(r, c));
    let mut r = residual(&u)?;
    for it in 0..opts.newton_max {
        let un = u.norm_l2();
        if un == T::zero() {
            return Err(Error::NoConvergence { msg: "Newton iterate collapsed to 0".into(), iterations: it, trace: as_f64(&trace) });
        }
        let rel = r.norm_l2() / un;
        trace.push(rel);
        if rel <= opts.newton_tol {
            return Ok(NewtonReport { u, iterations: it, residual: rel, trace });
        }
        let c = cw(&u);
        let op = |d: &Field6<T>| {
            let mut y = apply_l(d, k).expect("k checked");
            y.axpy(-T::one(), &prob.linearized(&u, d));
            y
        };
        let rhs = r.scaled(-T::one());
        let eta = (T::lit(0.1) * rel).min(T::lit(1e-3)).max(T::lit(1e-13));
        let (mut delta, _) = minres(op, |x| precond(x, c), &rhs, eta, opts.minres_max);
        let (m0, dm) = deflation(&u, known, opts.deflation_shift);
        if !known.is_empty() {
            let tau = T::one() / (T::one() - dm.dot(&delta));
            if tau.is_finite() {
                delta.scale_mut(tau);
            }
        }
        let phi0 = merit(&r, c, m0);
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..25 {
            let mut ut = u.clone();
            ut.axpy(step, &delta);
            let rt = residual(&ut)?;
            let (mt, _) = deflation(&ut, known, opts.deflation_shift);
            if merit(&rt, c, mt) < phi0 {
                u = symmetrize_d4(&ut)?;
                r = if u == ut { rt } else { residual(&u)? };
                accepted = true;
                break;
            }
            step = step * T::half();
        }
        if !accepted {
            return Err(Error::NoConvergence {
                msg: format!("Newton line search stalled at relative residual {rel:e}"),
                iterations: it,
                trace: as_f64(&trace),
            });
        }
    }
    let rel = r.norm_l2() / u.norm_l2();
    trace.push(rel);
    if rel <= opts.newton_tol {
        let n = trace.len();
        return Ok(NewtonReport { u, iterations: n, residual: rel, trace });
    }
    Err(Error::NoConvergence { msg: format!("Newton stopped at relative residual {rel:e}"), iterations: opts.newton_max, trace: as_f64(&trace) })
}

fn as_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

struct Peak<T> {
    coef: Vec<T>,
    eval: ReducedEval<T>,
}

fn combine<T: Real>(support: &[Field6<T>], dir: &Field6<T>, c: &[T]) -> Field6<T> {
    let mut v = dir.scaled(c[c.len() - 1]);
    for (s, &a) in support.iter().zip(c) {
        v.axpy(a, s);
    }
    v
}

/// Maximizes `J̃` over `span(support) ⊕ {t dir : t > 0}`.
fn peak<T: Real>(
    prob: &TmProblem<T>,
    support: &[Field6<T>],
    dir: &Field6<T>,
    start: &[T],
    warm: Option<&ScalarPair<T>>,
    opts: &SolverOptions<T>,
) -> Result<Peak<T>> {
    let m = support.len() + 1;
    let basis: Vec<&Field6<T>> = support.iter().chain(std::iter::once(dir)).collect();
    let gradient = |ev: &ReducedEval<T>| DVector::from_iterator(m, basis.iter().map(|b| ev.grad.dot(b).as_f64()));
    let mut c: Vec<T> = start.to_vec();
    let mut ev = eval(prob, &combine(support, dir, &c), warm, opts)?;
    for _ in 0..30 {
        let g = gradient(&ev);
        let scale = c.iter().fold(T::one(), |a, &x| a.max(x.abs()));
        if T::lit(g.norm()) <= T::lit(1e-9) * scale * scale {
            break;
        }
        let mut hess = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            let eps = T::lit(1e-5) * scale;
            let mut cj = c.clone();
            cj[j] = cj[j] + eps;
            let ej = eval(prob, &combine(support, dir, &cj), Some(&ev.state.p), opts)?;
            let gj = gradient(&ej);
            for i in 0..m {
                hess[(i, j)] = (gj[i] - g[i]) / eps.as_f64();
            }
        }
        let hs = (&hess + hess.transpose()) * 0.5;
        let eig = hs.clone().symmetric_eigen();
        let newton_ok = eig.eigenvalues.iter().all(|&l| l < 0.0);
        let step: DVector<f64> = if newton_ok {
            hs.lu().solve(&(-&g)).unwrap_or_else(|| g.clone())
        } else {
            // ascent along the gradient, scaled by the largest curvature
            let lmax = eig.eigenvalues.iter().fold(1e-12f64, |a, &l| a.max(l.abs()));
            &g / lmax
        };
        let mut s = T::one();
        let mut moved = false;
        for _ in 0..30 {
            let ct: Vec<T> = c.iter().zip(step.iter()).map(|(&a, &d)| a + s * T::lit(d)).collect();
            if ct[m - 1] > T::zero() {
                let et = eval(prob, &combine(support, dir, &ct), Some(&ev.state.p), opts)?;
                if et.value >= ev.value {
                    c = ct;
                    ev = et;
                    moved = true;
                    break;
                }
            }
            s = s * T::half();
        }
        if !moved {
            break;
        }
    }
    Ok(Peak { coef: c, eval: ev })
}

/// Li–Zhou local minimax: the direction `dir` is moved by steepest descent
/// of its peak value over `span(support) ⊕ ℝ₊dir`. Returns the last peak.
pub fn lmm_search<T: Real>(
    prob: &TmProblem<T>,
    support: &[Field6<T>],
    dir: &Field6<T>,
    opts: &SolverOptions<T>,
    log: &mut Vec<String>,
) -> Result<Field6<T>> {
    let d0 = prob.low_pass(dir);
    let d = d0.scaled(T::one() / prob.norm(&d0));
    // largest value on the bare ray gives a starting scale
    let mut t = T::one();
    let mut best = (T::neg_infinity(), t);
    for _ in 0..12 {
        let j = eval(prob, &d.scaled(t), None, opts)?.value;
        if j > best.0 {
            best = (j, t);
        } else if j < T::zero() {
            break;
        }
        t = t * T::two();
    }
    minimax(prob, support, &d, best.1, opts, log)
}

fn minimax<T: Real>(
    prob: &TmProblem<T>,
    support: &[Field6<T>],
    dir: &Field6<T>,
    scale: T,
    opts: &SolverOptions<T>,
    log: &mut Vec<String>,
) -> Result<Field6<T>> {
    let support: Vec<Field6<T>> = support.iter().map(|s| prob.project_v(s)).collect::<Result<_>>()?;
    let d0 = prob.low_pass(dir);
    let n0 = prob.norm(&d0);
    let mut d = d0.scaled(T::one() / n0);
    let best = (T::zero(), scale * n0 / prob.norm(dir));
    let mut start = vec![T::zero(); support.len()];
    start.push(best.1);
    let mut pk = peak(prob, &support, &d, &start, None, opts)?;
    let mut eta = T::one();
    for it in 0..opts.max_iter {
        let tcoef = pk.coef[pk.coef.len() - 1];
        let (g, dn) = sobolev(prob, &pk.eval.grad);
        let pn = prob.norm(&pk.eval.state.v);
        let rel = dn / pn;
        if it % 10 == 0 {
            log.push(format!(
                "minimax step {it}: peak J = {:e}, relative gradient {rel:e}, max|u| = {:e}",
                pk.eval.value,
                pk.eval.state.u.max_abs()
            ));
        }
        if rel <= opts.switch_tol {
            return Ok(pk.eval.state.u);
        }
        let mut accepted = false;
        for _ in 0..25 {
            let mut dt = d.clone();
            dt.axpy(-eta / tcoef, &g);
            let dt = dt.scaled(T::one() / prob.norm(&dt));
            let pt = peak(prob, &support, &dt, &pk.coef, Some(&pk.eval.state.p), opts)?;
            let drop = pk.eval.value - pt.eval.value;
            // a drop far beyond the first-order prediction means the ray peak
            // jumped to another branch
            if drop >= T::lit(1e-4) * eta * dn * dn && drop <= T::lit(4.0) * eta * dn * dn {
                d = dt;
                pk = pt;
                accepted = true;
                break;
            }
            eta = eta * T::half();
        }
        if !accepted {
            log.push(format!("minimax step {it}: line search failed at relative gradient {rel:e}"));
            return Ok(pk.eval.state.u);
        }
        eta = (eta * T::lit(1.5)).min(T::lit(4.0));
    }
    log.push("minimax budget exhausted".into());
    Ok(pk.eval.state.u)
}

/// Re-solves the inner problem at `P_V u` and measures every certification quantity.
pub fn certify<T: Real>(
    prob: &TmProblem<T>,
    u: &Field6<T>,
    opts: &SolverOptions<T>,
    label: &str,
    log: Vec<String>,
) -> Result<CriticalPoint<T>> {
    let sp = prob.split(u)?;
    let sol = super::inner_minimize_from(prob, &sp.v, sp.potentials, &opts.inner)?;
    measure_state(prob, &sol.u, opts, label, log)
}

/// Every certification quantity of `u` as given, without re-solving the
/// inner problem. Deterministic in `u`.
pub fn measure_state<T: Real>(
    prob: &TmProblem<T>,
    u: &Field6<T>,
    opts: &SolverOptions<T>,
    label: &str,
    log: Vec<String>,
) -> Result<CriticalPoint<T>> {
    let sp = prob.split(u)?;
    let state = StateDecomp { v: sp.v, p: sp.potentials, w: sp.w, u: u.clone() };
    let kkt = super::kkt_residual(prob, u);
    let action = action_j(prob, &state.u)?;
    let r = grad_j(prob, &state.u)?;
    let g = prob.project_v(&r)?;
    let grad_norm = prob.dual_norm(&g);
    let v_norm = prob.norm(&state.v);
    let un = state.u.norm_l2().max(T::epsilon());
    let maxwell_residual = r.norm_l2() / un;
    let rtz = decompose_rtz(&state.u);
    let umax = state.u.max_abs().max(T::min_positive_value());
    let mut sym = reflect(&state.u)?.sub(&state.u).max_abs();
    for q in 1..4 {
        sym = sym.max(rot90(&state.u, q)?.sub(&state.u).max_abs());
    }
    let curl = circ_curl(&state.u, prob.k)?;
    let energy_bound = T::half() * (T::one() + T::one() / (prob.omega * prob.omega)) * curl.dot(&curl);
    let tau_fraction = rtz.tau_fraction();
    let certified = grad_norm <= opts.tol * v_norm.max(T::one())
        && maxwell_residual < T::lit(1e-5)
        && kkt <= T::lit(1e-8)
        && tau_fraction < T::lit(1e-6)
        && action > T::zero();
    Ok(CriticalPoint {
        label: label.to_string(),
        action,
        grad_norm,
        v_norm,
        cerami_residual: (T::one() + v_norm) * grad_norm,
        maxwell_residual,
        kkt,
        tau_fraction,
        spectral_tail: prob.spectral_tail(&state.u),
        lattice_symmetry: sym / umax,
        profiles: StateProfiles {
            alpha: rtz.alpha_rho,
            gamma: rtz.alpha_zeta,
            alpha_tilde: rtz.talpha_rho,
            gamma_tilde: rtz.talpha_zeta,
        },
        energy_bound,
        certified,
        state,
        log,
    })
}

fn distinct<T: Real>(a: &CriticalPoint<T>, b: &CriticalPoint<T>) -> bool {
    let d1 = a.state.u.sub(&b.state.u).norm_l2();
    let d2 = a.state.u.add(&b.state.u).norm_l2();
    let scale = b.state.u.norm_l2().max(T::min_positive_value());
    d1.min(d2) > T::lit(1e-3) * scale && (a.action - b.action).abs() > T::lit(1e-8) * b.action.abs()
}

/// Mountain-pass state followed by minimax states over growing supports,
/// each polished by deflated Newton. Returns the states sorted by action;
/// fewer than `m` is not an error and is explained in the log.
pub fn higher_state_search<T: Real>(prob: &TmProblem<T>, opts: &SolverOptions<T>, m: usize) -> Result<SearchOutcome<T>> {
    if m < 2 {
        return Err(Error::Config(format!("higher state search needs at least 2 states, got {m}")));
    }
    let mut log = Vec::new();
    let first = mountain_pass_search(prob, opts)?;
    log.push(format!("state 1 (mountain pass): J = {:e}", first.action));
    let mut found = vec![first];
    for j in 1..m {
        let mut got = false;
        for attempt in 0..3u64 {
            let seed = opts.seed.wrapping_add(1000 * j as u64 + attempt);
            let dir = class_seed(prob, j + attempt as usize, seed)?;
            let support: Vec<Field6<T>> = found.iter().map(|c| c.state.u.clone()).collect();
            let mut slog = Vec::new();
            let guess = match lmm_search(prob, &support, &dir, opts, &mut slog) {
                Ok(g) => g,
                Err(e) => {
                    log.push(format!("state {}: minimax attempt {attempt} failed: {e}", j + 1));
                    continue;
                }
            };
            let polished = match newton_polish(prob, &guess, &support, opts) {
                Ok(n) => n,
                Err(e) => {
                    log.push(format!("state {}: Newton attempt {attempt} failed: {e}", j + 1));
                    continue;
                }
            };
            slog.push(format!("deflated Newton: {} iterations, residual {:e}", polished.iterations, polished.residual));
            let cp = certify(prob, &polished.u, opts, &format!("minimax {}", j + 1), slog)?;
            if found.iter().all(|f| distinct(&cp, f)) {
                log.push(format!("state {}: J = {:e}", j + 1, cp.action));
                found.push(cp);
                got = true;
                break;
            }
            log.push(format!("state {}: attempt {attempt} returned a known state", j + 1));
        }
        if !got {
            log.push(format!("stopped with {} of {m} states", found.len()));
            break;
        }
    }
    found.sort_by(|a, b| a.action.partial_cmp(&b.action).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SearchOutcome { states: found, log })
}

/// For `f(u) = λ|u|²u`-type Kerr terms: maps a solution at `λ = 1` to the
/// solution at `λ`, `u ↦ u/√λ`.
pub fn kerr_rescale<T: Real>(u: &Field6<T>, lambda: T) -> Result<Field6<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain(format!("rescaling needs λ > 0, got {lambda}")));
    }
    Ok(u.scaled(T::one() / lambda.sqrt()))
}
