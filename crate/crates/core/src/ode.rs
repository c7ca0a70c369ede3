//! Adaptive Dormand–Prince 5(4) integration of small autonomous-or-not ODE systems.

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options<T> {
    pub rtol: T,
    pub atol: T,
    /// Largest step magnitude.
    pub max_step: T,
    pub initial_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Dopri5Options<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            max_step: T::lit(0.1),
            initial_step: T::lit(1e-6),
            max_steps: 1_000_000,
        }
    }
}

/// Accepted steps: abscissae, states and right-hand sides at those states.
#[derive(Debug, Clone)]
pub struct Solution<T, const N: usize> {
    pub t: Vec<T>,
    pub y: Vec<[T; N]>,
    pub dy: Vec<[T; N]>,
    /// Set when the stop predicate ended the integration early.
    pub stopped: bool,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `stop(t, y)` is consulted after every accepted step; returning `true`
/// ends the integration with `stopped = true`.
pub fn dopri5<T: Real, const N: usize>(
    f: impl Fn(T, &[T; N]) -> [T; N],
    t0: T,
    y0: [T; N],
    t1: T,
    opts: &Dopri5Options<T>,
    mut stop: impl FnMut(T, &[T; N]) -> bool,
) -> Result<Solution<T, N>> {
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut sol = Solution { t: vec![t], y: vec![y], dy: vec![k0], stopped: false };
    let mut h = opts.initial_step.min(opts.max_step).min((t1 - t0).abs());
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(5.0);
    let safety = T::lit(0.9);
    let mut steps = 0;
    while (t1 - t) * dir > T::zero() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::NoConvergence {
                msg: "step limit reached".into(),
                iterations: steps,
                trace: vec![t.as_f64()],
            });
        }
        if h < T::epsilon() * T::lit(16.0) * t.abs().max(T::one()) {
            return Err(Error::NoConvergence {
                msg: format!("step size underflow at t = {t}"),
                iterations: steps,
                trace: vec![t.as_f64(), h.as_f64()],
            });
        }
        let last = (t + dir * h - t1) * dir >= T::zero();
        let hs = if last { (t1 - t).abs() } else { h };
        let sh = dir * hs;
        let mut k = [[T::zero(); N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = T::lit(A[s][j]);
                if a != T::zero() {
                    for i in 0..N {
                        ys[i] = ys[i] + sh * a * kj[i];
                    }
                }
            }
            k[s] = f(t + sh * T::lit(C[s]), &ys);
        }
        let mut y_new = y;
        for i in 0..N {
            let mut acc = T::zero();
            for (s, ks) in k.iter().enumerate().take(6) {
                acc = acc + T::lit(A[6][s]) * ks[i];
            }
            y_new[i] = y[i] + sh * acc;
        }
        let mut err = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (s, ks) in k.iter().enumerate() {
                e = e + T::lit(E[s]) * ks[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = sh * e / sc;
            err = err + r * r;
        }
        err = (err / T::from_usize_lossy(N)).sqrt();
        if !err.is_finite() {
            h = h * fac_min;
            continue;
        }
        if err <= T::one() {
            t = if last { t1 } else { t + sh };
            y = y_new;
            k0 = k[6];
            sol.t.push(t);
            sol.y.push(y);
            sol.dy.push(k0);
            if stop(t, &y) {
                sol.stopped = true;
                break;
            }
            let fac = if err == T::zero() { fac_max } else { (safety * err.powf(T::lit(-0.2))).min(fac_max) };
            h = (hs * fac).min(opts.max_step);
        } else {
            let fac = (safety * err.powf(T::lit(-0.2))).max(fac_min);
            h = hs * fac;
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let opts = Dopri5Options::<f64>::default();
        let sol = dopri5(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &opts, |_, _| false).unwrap();
        let y = sol.y.last().unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        assert_eq!(*sol.t.last().unwrap(), 10.0);
    }

    #[test]
    fn backward_direction() {
        let opts = Dopri5Options::<f64>::default();
        let sol = dopri5(|_t, y: &[f64; 1]| [y[0]], 1.0, [1f64.exp()], 0.0, &opts, |_, _| false).unwrap();
        assert!((sol.y.last().unwrap()[0] - 1.0).abs() < 1e-9);
    }
}
