//! Gauss–Legendre quadrature.

use crate::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]` on geometric panels
/// (ratio 2) when `0 < a`, which keeps power-law integrands well resolved.
pub fn integrate_geometric<T: Real>(f: impl Fn(T) -> T, a: T, b: T) -> T {
    if b <= a {
        return T::zero();
    }
    let (x, w) = gauss_legendre(12);
    let mut total = T::zero();
    let mut lo = a;
    while lo < b {
        let hi = if a > T::zero() { (lo * T::two()).min(b) } else { b };
        let hi = if hi <= lo { b } else { hi };
        let c = (lo + hi) * T::half();
        let r = (hi - lo) * T::half();
        let mut s = T::zero();
        for (xi, wi) in x.iter().zip(&w) {
            s = s + T::lit(*wi) * f(c + r * T::lit(*xi));
        }
        total = total + s * r;
        lo = hi;
    }
    total
}
