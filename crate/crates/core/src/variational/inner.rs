//! Minimization of `w ↦ ½∫V|v+w|² + ∫F(v+w)` over `w = ∇̊p`.

use crate::error::{Error, Result};
use crate::grid::{Field6, ScalarPair};
use crate::krylov::pcg;
use crate::operators::{circ_grad, circ_grad_adjoint};
use crate::Real;

use super::TmProblem;

#[derive(Debug, Clone, Copy)]
pub struct InnerOptions<T> {
    /// Target for the relative kernel residual `‖P_W(Vu + f(u))‖ / ‖Vu + f(u)‖`.
    pub tol: T,
    pub max_iter: usize,
    pub cg_max: usize,
}

impl<T: Real> Default for InnerOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), max_iter: 60, cg_max: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct InnerSolution<T> {
    pub w: Field6<T>,
    pub p: ScalarPair<T>,
    pub u: Field6<T>,
    pub kkt: T,
    pub iterations: usize,
    /// Kernel residual per Newton iteration.
    pub trace: Vec<T>,
}

fn kkt_parts<T: Real>(prob: &TmProblem<T>, u: &Field6<T>) -> (ScalarPair<T>, T) {
    let z = prob.vu_plus_f(u);
    let g = circ_grad_adjoint(&z, prob.k);
    let m = prob.shifted_inverse_pair(&g, prob.k * prob.k);
    let zn = z.norm_l2();
    let kkt = if zn == T::zero() { T::zero() } else { g.dot(&m).max(T::zero()).sqrt() / zn };
    (g, kkt)
}

/// `‖P_W(Vu + f(u))‖ / ‖Vu + f(u)‖`, the size of `J'(u)` on kernel test
/// fields relative to the nonlinear term.
pub fn kkt_residual<T: Real>(prob: &TmProblem<T>, u: &Field6<T>) -> T {
    kkt_parts(prob, u).1
}

/// Damped Newton–CG from the potentials `p0`.
pub fn inner_minimize_from<T: Real>(
    prob: &TmProblem<T>,
    v: &Field6<T>,
    p0: ScalarPair<T>,
    opts: &InnerOptions<T>,
) -> Result<InnerSolution<T>> {
    v.grid().check_same(&prob.grid)?;
    let k = prob.k;
    let kk = k * k;
    let mut p = p0;
    let mut w = circ_grad(&p, k)?;
    let mut u = v.add(&w);
    let mut psi = prob.potential_energy(&u);
    let mut trace = Vec::new();
    for it in 0..opts.max_iter {
        let (g, kkt) = kkt_parts(prob, &u);
        trace.push(kkt);
        if kkt <= opts.tol {
            return Ok(InnerSolution { w, p, u, kkt, iterations: it, trace });
        }
        let mags = u.pointwise_norm();
        let cbar = prob
            .permittivity
            .values
            .iter()
            .zip(&mags)
            .fold(T::zero(), |a, (&vv, &m)| a + vv + prob.nonlinearity.ratio(m))
            / T::from_usize_lossy(mags.len());
        let hess = |d: &ScalarPair<T>| {
            let gd = circ_grad(d, k).expect("k checked");
            circ_grad_adjoint(&prob.linearized(&u, &gd), k)
        };
        let prec = |r: &ScalarPair<T>| {
            let mut m = prob.shifted_inverse_pair(r, kk);
            for x in m.a.iter_mut().chain(m.at.iter_mut()) {
                *x = *x / cbar;
            }
            m
        };
        let mut rhs = g.clone();
        for x in rhs.a.iter_mut().chain(rhs.at.iter_mut()) {
            *x = -*x;
        }
        let forcing = (T::lit(0.1) * kkt.sqrt()).min(T::lit(0.1)).max(T::lit(1e-12));
        let (d, _) = pcg(hess, prec, &rhs, forcing, opts.cg_max);
        let slope = g.dot(&d);
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let mut pt = p.clone();
            pt.axpy(step, &d);
            let wt = circ_grad(&pt, k)?;
            let ut = v.add(&wt);
            let pst = prob.potential_energy(&ut);
            if pst <= psi + T::lit(1e-4) * step * slope + T::lit(16.0) * T::epsilon() * psi.abs() {
                p = pt;
                w = wt;
                u = ut;
                psi = pst;
                accepted = true;
                break;
            }
            step = step * T::half();
        }
        if !accepted {
            // only roundoff left to gain
            if kkt <= opts.tol.sqrt() * T::lit(1e-2) {
                return Ok(InnerSolution { w, p, u, kkt, iterations: it, trace });
            }
            break;
        }
    }
    let kkt = kkt_residual(prob, &u);
    if kkt <= opts.tol {
        let n = trace.len();
        return Ok(InnerSolution { w, p, u, kkt, iterations: n, trace });
    }
    Err(Error::NoConvergence {
        msg: format!("inner minimization stopped at kernel residual {kkt:e}"),
        iterations: trace.len(),
        trace: trace.iter().map(|t| t.as_f64()).collect(),
    })
}

/// Minimizer `w(v) = ∇̊p` of the inner problem, started from `p = 0`.
pub fn inner_minimize<T: Real>(prob: &TmProblem<T>, v: &Field6<T>, tol: T) -> Result<(Field6<T>, ScalarPair<T>)> {
    let opts = InnerOptions { tol, ..InnerOptions::default() };
    let s = inner_minimize_from(prob, v, ScalarPair::zeros(prob.grid), &opts)?;
    Ok((s.w, s.p))
}
