//! Preconditioned conjugate gradients and MINRES over grid vectors.

use crate::grid::{Field6, ScalarPair};
use crate::Real;

/// The few vector operations the Krylov loops need.
pub trait KrylovVector<T: Real>: Clone {
    fn inner(&self, other: &Self) -> T;
    /// `self += a x`
    fn add_scaled(&mut self, a: T, x: &Self);
    fn scale(&mut self, a: T);
    fn zeroed(&self) -> Self;
}

impl<T: Real> KrylovVector<T> for Field6<T> {
    fn inner(&self, other: &Self) -> T {
        self.dot(other)
    }
    fn add_scaled(&mut self, a: T, x: &Self) {
        self.axpy(a, x);
    }
    fn scale(&mut self, a: T) {
        self.scale_mut(a);
    }
    fn zeroed(&self) -> Self {
        Field6::zeros(*self.grid())
    }
}

impl<T: Real> KrylovVector<T> for ScalarPair<T> {
    fn inner(&self, other: &Self) -> T {
        self.dot(other)
    }
    fn add_scaled(&mut self, a: T, x: &Self) {
        self.axpy(a, x);
    }
    fn scale(&mut self, a: T) {
        for v in self.a.iter_mut().chain(self.at.iter_mut()) {
            *v = *v * a;
        }
    }
    fn zeroed(&self) -> Self {
        ScalarPair::zeros(*self.grid())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovStats<T> {
    pub iterations: usize,
    /// Final residual in the preconditioner norm, relative to the right side.
    pub relative_residual: T,
    /// A direction of non-positive curvature was met (CG only).
    pub indefinite: bool,
}

/// Solves `A x = b` for SPD `A` with SPD preconditioner `M⁻¹`, from `x = 0`.
pub fn pcg<T: Real, V: KrylovVector<T>>(
    a: impl Fn(&V) -> V,
    m_inv: impl Fn(&V) -> V,
    b: &V,
    rtol: T,
    max_iter: usize,
) -> (V, KrylovStats<T>) {
    let mut x = b.zeroed();
    let mut r = b.clone();
    let mut z = m_inv(&r);
    let mut rz = r.inner(&z);
    let rz0 = rz;
    let mut stats = KrylovStats { iterations: 0, relative_residual: T::zero(), indefinite: false };
    if rz0 <= T::zero() {
        return (x, stats);
    }
    let mut p = z.clone();
    for it in 1..=max_iter {
        let ap = a(&p);
        let pap = p.inner(&ap);
        if pap <= T::zero() {
            stats.indefinite = true;
            if it == 1 {
                x = z;
            }
            break;
        }
        let alpha = rz / pap;
        x.add_scaled(alpha, &p);
        r.add_scaled(-alpha, &ap);
        z = m_inv(&r);
        let rz_new = r.inner(&z);
        stats.iterations = it;
        stats.relative_residual = (rz_new.max(T::zero()) / rz0).sqrt();
        if stats.relative_residual <= rtol {
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        p.scale(beta);
        p.add_scaled(T::one(), &z);
    }
    (x, stats)
}

/// Preconditioned MINRES for symmetric (possibly indefinite) `A`, from `x = 0`.
pub fn minres<T: Real, V: KrylovVector<T>>(
    a: impl Fn(&V) -> V,
    m_inv: impl Fn(&V) -> V,
    b: &V,
    rtol: T,
    max_iter: usize,
) -> (V, KrylovStats<T>) {
    let mut x = b.zeroed();
    let mut r1 = b.clone();
    let mut y = m_inv(&r1);
    let beta1 = r1.inner(&y).max(T::zero()).sqrt();
    let mut stats = KrylovStats { iterations: 0, relative_residual: T::zero(), indefinite: false };
    if beta1 == T::zero() {
        return (x, stats);
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (T::zero(), beta1);
    let (mut dbar, mut epsln, mut phibar) = (T::zero(), T::zero(), beta1);
    let (mut cs, mut sn) = (-T::one(), T::zero());
    let mut w = b.zeroed();
    let mut w2 = b.zeroed();
    stats.relative_residual = T::one();
    for it in 1..=max_iter {
        let mut v = y.clone();
        v.scale(T::one() / beta);
        y = a(&v);
        if it >= 2 {
            y.add_scaled(-beta / oldb, &r1);
        }
        let alfa = v.inner(&y);
        y.add_scaled(-alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y);
        y = m_inv(&r2);
        oldb = beta;
        beta = r2.inner(&y).max(T::zero()).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(T::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;
        let w1 = std::mem::replace(&mut w2, w);
        let mut wn = v;
        wn.add_scaled(-oldeps, &w1);
        wn.add_scaled(-delta, &w2);
        wn.scale(T::one() / gamma);
        w = wn;
        x.add_scaled(phi, &w);
        stats.iterations = it;
        stats.relative_residual = phibar / beta1;
        if stats.relative_residual <= rtol || beta == T::zero() {
            break;
        }
    }
    (x, stats)
}
