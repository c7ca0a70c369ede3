//! Physical fields of a travelling wave `E = U cos(kx₃+ωt) + Ũ sin(kx₃+ωt)`:
//! synthesis of `E` and `B`, the Maxwell residual, and the energy per unit
//! length in `x₃` with its curl bound.

use crate::error::{Error, Result};
use crate::grid::{Field6, Grid2D};
use crate::operators::{check_k, circ_curl, d1, d2, divergences};
use crate::quad::gauss_legendre;
use crate::symmetry::decompose_rtz;
use crate::variational::{grad_j, TmProblem};
use crate::Real;

/// τ-fraction below which the profile formula for `B` is used.
pub const SHAPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext<T> {
    pub k: T,
    pub omega: T,
    /// Left end of the unit `x₃` interval of the energy integral.
    pub a: T,
    /// Gauss–Legendre nodes in `x₃` over `[a, a+1]`.
    pub z_samples: usize,
    /// Trapezoid nodes over one time period.
    pub t_samples: usize,
}

impl<T: Real> WaveContext<T> {
    pub fn new(k: T, omega: T, a: T) -> Result<Self> {
        check_k(k)?;
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::Config(format!("ω must be positive, got {omega}")));
        }
        Ok(Self { k, omega, a, z_samples: 64, t_samples: 16 })
    }

    pub fn phase(&self, z: T, t: T) -> T {
        self.k * z + self.omega * t
    }

    pub fn period(&self) -> T {
        T::two() * T::PI() / self.omega
    }
}

/// A 3-vector field on the planar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3<T> {
    pub grid: Grid2D<T>,
    pub comps: [Vec<T>; 3],
}

impl<T: Real> VectorField3<T> {
    pub fn max_abs(&self) -> T {
        self.comps.iter().flatten().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_component(&self, c: usize) -> T {
        self.comps[c].iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn norm_sq_at(&self, p: usize) -> T {
        self.comps.iter().fold(T::zero(), |a, c| a + c[p] * c[p])
    }
}

fn combine<T: Real>(g: Grid2D<T>, a: [&[T]; 3], ca: T, b: [&[T]; 3], cb: T) -> VectorField3<T> {
    let comps = std::array::from_fn(|c| a[c].iter().zip(b[c]).map(|(&x, &y)| ca * x + cb * y).collect());
    VectorField3 { grid: g, comps }
}

fn upper<T>(u: &Field6<T>) -> [&[T]; 3] {
    [&u.comps[0], &u.comps[1], &u.comps[2]]
}

fn lower<T>(u: &Field6<T>) -> [&[T]; 3] {
    [&u.comps[3], &u.comps[4], &u.comps[5]]
}

/// `E = U cos θ + Ũ sin θ`, `θ = kz + ωt`.
pub fn synthesize_e<T: Real>(u: &Field6<T>, ctx: &WaveContext<T>, z: T, t: T) -> VectorField3<T> {
    let th = ctx.phase(z, t);
    combine(*u.grid(), upper(u), th.cos(), lower(u), th.sin())
}

/// `⟨|E|²⟩` over one period by the trapezoid rule on `ctx.t_samples` nodes.
pub fn time_averaged_intensity<T: Real>(u: &Field6<T>, ctx: &WaveContext<T>, z: T) -> Vec<T> {
    let samples = ctx.t_samples.max(3);
    let n = u.grid().len();
    let mut acc = vec![T::zero(); n];
    let dt = ctx.period() / T::from_usize_lossy(samples);
    for s in 0..samples {
        let e = synthesize_e(u, ctx, z, dt * T::from_usize_lossy(s));
        for (p, a) in acc.iter_mut().enumerate() {
            *a = *a + e.norm_sq_at(p);
        }
    }
    acc.into_iter().map(|a| a / T::from_usize_lossy(samples)).collect()
}

/// Which formula produced a magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BBranch {
    /// Radial-profile formula; third component zero by construction.
    Profile,
    /// Discrete 3D curl of `E`.
    Curl,
}

#[derive(Debug, Clone)]
pub struct MagneticField<T> {
    pub field: VectorField3<T>,
    pub branch: BBranch,
    pub warning: Option<String>,
}

/// `∇×E` with central differences in the plane and the exact `x₃` derivative.
pub fn curl_e<T: Real>(u: &Field6<T>, ctx: &WaveContext<T>, z: T, t: T) -> VectorField3<T> {
    let c = circ_curl(u, ctx.k).expect("k checked by the context");
    let th = ctx.phase(z, t);
    combine(*u.grid(), upper(&c), th.cos(), lower(&c), th.sin())
}

/// Magnetic induction of the travelling wave.
///
/// For fields of the form `U = α x/|x| + γ e₃`, `Ũ = α̃ x/|x| + γ̃ e₃` the
/// result is
/// `(∂₂γ - kα̃x₂/|x|, -∂₁γ + kα̃x₁/|x|, 0) cos θ + (kαx₂/|x| + ∂₂γ̃, -kαx₁/|x| - ∂₁γ̃, 0) sin θ`,
/// built from the ρ and ζ parts of `u`. Other inputs fall back to the curl
/// of `E` and carry a warning.
pub fn synthesize_b<T: Real>(u: &Field6<T>, ctx: &WaveContext<T>, z: T, t: T) -> MagneticField<T> {
    let split = decompose_rtz(u);
    let frac = split.tau_fraction();
    if !(frac < T::lit(SHAPE_TOL)) {
        return MagneticField {
            field: curl_e(u, ctx, z, t),
            branch: BBranch::Curl,
            warning: Some(format!("τ-fraction {frac:e} too large for the profile formula; used the curl of E")),
        };
    }
    let g = *u.grid();
    let k = ctx.k;
    let gamma = &split.u_zeta.comps[2];
    let gamma_t = &split.tu_zeta.comps[5];
    let (d1g, d2g) = (d1(&g, gamma), d2(&g, gamma));
    let (d1gt, d2gt) = (d1(&g, gamma_t), d2(&g, gamma_t));
    let (ar1, ar2) = (&split.u_rho.comps[0], &split.u_rho.comps[1]);
    let (tr1, tr2) = (&split.tu_rho.comps[3], &split.tu_rho.comps[4]);
    let th = ctx.phase(z, t);
    let (c, s) = (th.cos(), th.sin());
    let n = g.len();
    let mut out = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    for p in 0..n {
        out[0][p] = (d2g[p] - k * tr2[p]) * c + (k * ar2[p] + d2gt[p]) * s;
        out[1][p] = (-d1g[p] + k * tr1[p]) * c + (-k * ar1[p] - d1gt[p]) * s;
    }
    MagneticField { field: VectorField3 { grid: g, comps: out }, branch: BBranch::Profile, warning: None }
}

/// `B` from Faraday's law: `(1/ω)(C₄₅₆ cos θ - C₁₂₃ sin θ)` with `C = ∇̊×u`.
pub fn faraday_b<T: Real>(u: &Field6<T>, ctx: &WaveContext<T>, z: T, t: T) -> VectorField3<T> {
    let c = circ_curl(u, ctx.k).expect("k checked by the context");
    let th = ctx.phase(z, t);
    let w = T::one() / ctx.omega;
    combine(*u.grid(), lower(&c), w * th.cos(), upper(&c), -w * th.sin())
}

/// `div E = div₁u cos θ + div₂u sin θ`.
pub fn div_e<T: Real>(u: &Field6<T>, ctx: &WaveContext<T>, z: T, t: T) -> Vec<T> {
    let (a, b) = divergences(u, ctx.k);
    let th = ctx.phase(z, t);
    a.iter().zip(&b).map(|(&x, &y)| x * th.cos() + y * th.sin()).collect()
}

/// `‖Lu - Vu - f(u)‖₂ / max(‖u‖₂, ε)`.
pub fn maxwell_residual<T: Real>(prob: &TmProblem<T>, u: &Field6<T>) -> Result<T> {
    let r = grad_j(prob, u)?;
    Ok(r.norm_l2() / u.norm_l2().max(T::epsilon()))
}

/// `⟨E, D⟩` written as `-V|E|² + χ(½|u|²)|E|²`.
pub fn ed_direct<T: Real>(v: T, chi: T, e: &[T; 3]) -> T {
    let e2 = e.iter().fold(T::zero(), |a, &x| a + x * x);
    (chi - v) * e2
}

/// `⟨E, D⟩` written as `(-V + χ(½|u|²))(|U|² cos²θ + |Ũ|² sin²θ)`.
pub fn ed_profile<T: Real>(v: T, chi: T, u: &[T; 6], theta: T) -> T {
    let uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let tt = u[3] * u[3] + u[4] * u[4] + u[5] * u[5];
    let (c, s) = (theta.cos(), theta.sin());
    (chi - v) * (uu * c * c + tt * s * s)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyReport {
    /// `½∫∫ₐ^{a+1} ⟨E,D⟩ + ⟨B,H⟩` with `⟨E,D⟩` as in [`ed_profile`].
    #[serde(rename = "L_t")]
    pub l_t: f64,
    /// `½(1 + 1/ω²)‖∇̊×u‖²`.
    pub bound: f64,
    /// `½∫∫ₐ^{a+1} (ε + χ)|E|² + |B|²` with `ε = V/ω²`.
    pub physical_energy: f64,
    pub a: f64,
    pub t: f64,
}

/// Energy per unit length at time `t`, Gauss–Legendre in `x₃` and the grid
/// sum in the plane. `⟨B,H⟩ = |B|²` uses the Faraday field.
pub fn em_energy<T: Real>(prob: &TmProblem<T>, u: &Field6<T>, ctx: &WaveContext<T>, t: T) -> Result<EnergyReport> {
    u.grid().check_same(&prob.grid)?;
    let (xs, ws) = gauss_legendre(ctx.z_samples.max(1));
    let g = prob.grid;
    let c = circ_curl(u, ctx.k)?;
    let w2 = T::one() / (ctx.omega * ctx.omega);
    let mut printed = T::zero();
    let mut physical = T::zero();
    for p in 0..g.len() {
        let x = u.at(p);
        let cc = c.at(p);
        let mag = x.iter().fold(T::zero(), |a, &y| a + y * y).sqrt();
        let chi = prob.nonlinearity.chi_effective(mag, ctx.omega);
        let v = prob.permittivity.values[p];
        let (mut acc_p, mut acc_f) = (T::zero(), T::zero());
        for (xi, wi) in xs.iter().zip(&ws) {
            let x3 = ctx.a + T::half() * (T::one() + T::lit(*xi));
            let th = ctx.phase(x3, t);
            let (cs, sn) = (th.cos(), th.sin());
            let e: [T; 3] = std::array::from_fn(|i| x[i] * cs + x[i + 3] * sn);
            let b2 = (0..3).fold(T::zero(), |a, i| {
                let b = cc[i + 3] * cs - cc[i] * sn;
                a + b * b
            }) * w2;
            let e2 = e.iter().fold(T::zero(), |a, &y| a + y * y);
            let wt = T::lit(*wi) * T::half();
            acc_p = acc_p + wt * (ed_profile(v, chi, &x, th) + b2);
            acc_f = acc_f + wt * ((v * w2 + chi) * e2 + b2);
        }
        printed = printed + acc_p;
        physical = physical + acc_f;
    }
    let area = g.cell_area();
    let bound = T::half() * (T::one() + w2) * c.dot(&c);
    Ok(EnergyReport {
        l_t: (T::half() * printed * area).as_f64(),
        bound: bound.as_f64(),
        physical_energy: (T::half() * physical * area).as_f64(),
        a: ctx.a.as_f64(),
        t: t.as_f64(),
    })
}

/// `max|D₁U₂ - D₂U₁|, max|D₁Ũ₂ - D₂Ũ₁|`: the third components of the
/// discrete curl, which vanish for exactly radial in-plane parts.
pub fn discrete_axial_curl<T: Real>(u: &Field6<T>) -> (T, T) {
    let g = *u.grid();
    let m = |a: &[T], b: &[T]| {
        let x = d1(&g, b);
        let y = d2(&g, a);
        x.iter().zip(&y).fold(T::zero(), |acc, (&p, &q)| acc.max((p - q).abs()))
    };
    (m(&u.comps[0], &u.comps[1]), m(&u.comps[3], &u.comps[4]))
}
