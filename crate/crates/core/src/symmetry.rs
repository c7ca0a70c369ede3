//! Rotational symmetry of planar profiles: the SO(2) action
//! `(g⋆u)(x) = g̃ u(g⁻¹x)`, the radial/azimuthal/axial split of an
//! equivariant profile, the involutions `S` and `S̃`, and radial profile
//! extraction by azimuthal binning.

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{Field6, Grid2D, RadialProfile};
use crate::Real;

/// Default relative equivariance residual above which [`RtzSplit::warning`] is set.
pub const EQUIVARIANCE_TOL: f64 = 1e-2;

/// Rotation angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngle<T>(pub T);

impl<T: Real> RotationAngle<T> {
    /// The planar rotation `g` as `[[c, -s], [s, c]]`.
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let (s, c) = self.0.sin_cos();
        [[c, -s], [s, c]]
    }

    /// `g̃ = diag(g, 1, g, 1)` acting on `(U, Ũ)`.
    pub fn block(&self) -> [[T; 6]; 6] {
        let g = self.matrix();
        let mut m = [[T::zero(); 6]; 6];
        for off in [0, 3] {
            for r in 0..2 {
                for c in 0..2 {
                    m[off + r][off + c] = g[r][c];
                }
            }
            m[off + 2][off + 2] = T::one();
        }
        m
    }
}

fn rotate_pair<T: Real>(c: T, s: T, v: &mut [T; 6]) {
    for off in [0, 3] {
        let (a, b) = (v[off], v[off + 1]);
        v[off] = c * a - s * b;
        v[off + 1] = s * a + c * b;
    }
}

/// Periodic bilinear interpolation of a scalar grid function at `(y1, y2)`.
pub fn interpolate_bilinear<T: Real>(g: &Grid2D<T>, f: &[T], y1: T, y2: T) -> T {
    let s1 = (y1 + g.half_width1()) / g.h();
    let s2 = (y2 + g.half_width2()) / g.h();
    let (f1, f2) = (s1.floor(), s2.floor());
    let (t1, t2) = (s1 - f1, s2 - f2);
    let i0 = g.wrap1(f1.to_isize().unwrap_or(0));
    let j0 = g.wrap2(f2.to_isize().unwrap_or(0));
    let i1 = (i0 + 1) % g.n1();
    let j1 = (j0 + 1) % g.n2();
    let one = T::one();
    f[g.idx(i0, j0)] * (one - t1) * (one - t2)
        + f[g.idx(i1, j0)] * t1 * (one - t2)
        + f[g.idx(i0, j1)] * (one - t1) * t2
        + f[g.idx(i1, j1)] * t1 * t2
}

/// `g̃ u(g⁻¹x)` with bilinear interpolation at off-grid points.
pub fn so2_act<T: Real>(angle: RotationAngle<T>, u: &Field6<T>) -> Field6<T> {
    if angle.0 == T::zero() {
        return u.clone();
    }
    let g = *u.grid();
    let (s, c) = angle.0.sin_cos();
    let mut out = Field6::zeros(g);
    for p in 0..g.len() {
        let (x1, x2) = g.point(p);
        // g⁻¹ x
        let y1 = c * x1 + s * x2;
        let y2 = -s * x1 + c * x2;
        let mut v: [T; 6] = std::array::from_fn(|k| interpolate_bilinear(&g, &u.comps[k], y1, y2));
        rotate_pair(c, s, &mut v);
        out.set(p, v);
    }
    out
}

fn require_d4_grid<T: Real>(g: &Grid2D<T>) -> Result<()> {
    if g.n1() != g.n2() || g.n1() % 2 != 0 {
        return Err(Error::Shape(format!(
            "exact lattice symmetries need a square grid with an even point count, got {}x{}",
            g.n1(),
            g.n2()
        )));
    }
    Ok(())
}

/// Exact quarter-turn action `g̃ u(g⁻¹x)` with `g` the rotation by `q·π/2`.
pub fn rot90<T: Real>(u: &Field6<T>, q: u32) -> Result<Field6<T>> {
    let g = *u.grid();
    require_d4_grid(&g)?;
    let mut cur = u.clone();
    let n = g.n1();
    for _ in 0..(q % 4) {
        let mut out = Field6::zeros(g);
        for i in 0..n {
            for j in 0..n {
                // g⁻¹(x1, x2) = (x2, -x1)
                let src = g.idx(j, (n - i) % n);
                let mut v = cur.at(src);
                rotate_pair(T::zero(), T::one(), &mut v);
                out.set(g.idx(i, j), v);
            }
        }
        cur = out;
    }
    Ok(cur)
}

/// Exact mirror `x2 ↦ -x2`, acting on both profiles by `diag(1, -1, 1)`.
///
/// On an equivariant field this flips the sign of both azimuthal parts,
/// so it coincides with `S S̃`.
pub fn reflect<T: Real>(u: &Field6<T>) -> Result<Field6<T>> {
    let g = *u.grid();
    require_d4_grid(&g)?;
    let n = g.n1();
    let mut out = Field6::zeros(g);
    for i in 0..n {
        for j in 0..n {
            let mut v = u.at(g.idx(i, (n - j) % n));
            v[1] = -v[1];
            v[4] = -v[4];
            out.set(g.idx(i, j), v);
        }
    }
    Ok(out)
}

/// Average over the eight lattice symmetries (quarter turns and mirrors).
pub fn symmetrize_d4<T: Real>(u: &Field6<T>) -> Result<Field6<T>> {
    let m = reflect(u)?;
    let mut acc = Field6::zeros(*u.grid());
    for q in 0..4 {
        acc.axpy(T::one(), &rot90(u, q)?);
        acc.axpy(T::one(), &rot90(&m, q)?);
    }
    acc.scale_mut(T::lit(0.125));
    Ok(acc)
}

/// Group average `(1/m) Σ_j so2_act(2πj/m, u)`; requires `m >= 8`.
pub fn symmetrize_so2<T: Real>(u: &Field6<T>, m: usize) -> Result<Field6<T>> {
    if m < 8 {
        return Err(Error::Config(format!("symmetrization needs at least 8 rotations, got {m}")));
    }
    let mut acc = Field6::zeros(*u.grid());
    let step = T::two() * T::PI() / T::from_usize_lossy(m);
    for j in 0..m {
        acc.axpy(T::one(), &so2_act(RotationAngle(step * T::from_usize_lossy(j)), u));
    }
    acc.scale_mut(T::one() / T::from_usize_lossy(m));
    Ok(acc)
}

/// Relative deviation `‖g⋆u - u‖₂ / ‖u‖₂` at the given angle.
pub fn equivariance_residual<T: Real>(u: &Field6<T>, angle: T) -> T {
    let nu = u.norm_l2();
    if nu == T::zero() {
        return T::zero();
    }
    so2_act(RotationAngle(angle), u).sub(u).norm_l2() / nu
}

/// Which coefficient of a planar profile `(P1, P2, P3)` to read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Rho,
    Tau,
    Zeta,
}

/// Radius below which a grid point is treated as the origin.
fn origin_radius<T: Real>(g: &Grid2D<T>) -> T {
    g.h() * T::lit(1e-9)
}

/// Pointwise coefficient `α_ρ`, `α_τ` or `α_ζ` of the profile stored at
/// components `off..off+3`; zero for `ρ, τ` at the origin.
fn coefficient<T: Real>(g: &Grid2D<T>, u: &Field6<T>, off: usize, part: Part) -> Vec<T> {
    let eps = origin_radius(g);
    (0..g.len())
        .map(|p| {
            let (x1, x2) = g.point(p);
            let r = x1.hypot(x2);
            let (a, b) = (u.comps[off][p], u.comps[off + 1][p]);
            match part {
                Part::Zeta => u.comps[off + 2][p],
                _ if r <= eps => T::zero(),
                Part::Rho => (a * x1 + b * x2) / r,
                Part::Tau => (-a * x2 + b * x1) / r,
            }
        })
        .collect()
}

/// Azimuthal binning of a scalar grid function into rings of width `h`
/// centred on multiples of `h`. Every cell has the same area, so the
/// area-weighted mean is the plain mean; `r` is the mean radius of the ring.
pub fn radial_bin<T: Real>(g: &Grid2D<T>, f: &[T]) -> RadialProfile<T> {
    let rmax = g.half_width1().min(g.half_width2());
    let nb = (rmax / g.h()).floor().to_usize().unwrap_or(0) + 1;
    let mut cnt = vec![0usize; nb];
    let mut sr = vec![T::zero(); nb];
    let mut s1 = vec![T::zero(); nb];
    let mut s2 = vec![T::zero(); nb];
    for p in 0..g.len() {
        let r = g.radius(p);
        let b = (r / g.h() + T::half()).floor().to_usize().unwrap_or(usize::MAX);
        if b >= nb {
            continue;
        }
        cnt[b] += 1;
        sr[b] = sr[b] + r;
        s1[b] = s1[b] + f[p];
        s2[b] = s2[b] + f[p] * f[p];
    }
    let mut out = RadialProfile { r: Vec::new(), value: Vec::new(), stddev: Vec::new() };
    for b in 0..nb {
        if cnt[b] == 0 {
            continue;
        }
        let n = T::from_usize_lossy(cnt[b]);
        let mean = s1[b] / n;
        let var = (s2[b] / n - mean * mean).max(T::zero());
        out.r.push(sr[b] / n);
        out.value.push(mean);
        out.stddev.push(var.sqrt());
    }
    out
}

/// Radial profile of a coefficient that vanishes at `r = 0`: the origin ring
/// is replaced by the quadratic `a r + b r²` through the next two rings.
fn radial_bin_vanishing<T: Real>(g: &Grid2D<T>, f: &[T]) -> RadialProfile<T> {
    let mut prof = radial_bin(g, f);
    if prof.len() >= 3 && prof.r[0] <= origin_radius(g) {
        let (r1, r2) = (prof.r[1], prof.r[2]);
        let (v1, v2) = (prof.value[1], prof.value[2]);
        let det = r1 * r2 * r2 - r2 * r1 * r1;
        let a = (v1 * r2 * r2 - v2 * r1 * r1) / det;
        let b = (r1 * v2 - r2 * v1) / det;
        let r0 = prof.r[0];
        prof.value[0] = a * r0 + b * r0 * r0;
    }
    prof
}

/// The radial/azimuthal/axial split of both profiles of `u`.
///
/// Pure parts: `u_rho = (U_ρ, 0)`, `u_tau = (U_τ, 0)`, `u_zeta = (U_ζ, 0)`
/// and the same for the second profile in `tu_*`. At the origin the whole
/// in-plane vector is assigned to the `ρ` part so the sum is exact.
#[derive(Debug, Clone)]
pub struct RtzSplit<T> {
    pub u_rho: Field6<T>,
    pub u_tau: Field6<T>,
    pub u_zeta: Field6<T>,
    pub tu_rho: Field6<T>,
    pub tu_tau: Field6<T>,
    pub tu_zeta: Field6<T>,
    pub alpha_rho: RadialProfile<T>,
    pub alpha_tau: RadialProfile<T>,
    pub alpha_zeta: RadialProfile<T>,
    pub talpha_rho: RadialProfile<T>,
    pub talpha_tau: RadialProfile<T>,
    pub talpha_zeta: RadialProfile<T>,
    /// Relative residual of a generic-angle rotation (interpolated).
    pub equivariance_residual: T,
    pub warning: bool,
}

impl<T: Real> RtzSplit<T> {
    /// `u_ρ` in the convention where the whole second profile rides along:
    /// `(U_ρ, Ũ)`. With this convention `u = u_ρ + u_τ + u_ζ` and `S`
    /// flips only `u_τ`.
    pub fn rho_part(&self) -> Field6<T> {
        self.u_rho.add(&self.tu_rho).add(&self.tu_tau).add(&self.tu_zeta)
    }

    /// `ũ_ρ = (U, Ũ_ρ)`, the counterpart used by `S̃`.
    pub fn rho_tilde_part(&self) -> Field6<T> {
        self.u_rho.add(&self.u_tau).add(&self.u_zeta).add(&self.tu_rho)
    }

    pub fn recompose(&self) -> Field6<T> {
        self.rho_part().add(&self.u_tau).add(&self.u_zeta)
    }

    /// `Σ|α_τ|² / Σ(|α_ρ|² + |α_τ|² + |α_ζ|²)` over both profiles, computed on
    /// the radial profiles with the ring area as weight.
    pub fn tau_fraction(&self) -> T {
        let weighted = |p: &RadialProfile<T>| {
            p.r.iter()
                .zip(&p.value)
                .fold(T::zero(), |a, (&r, &v)| a + r * v * v)
        };
        let tau = weighted(&self.alpha_tau) + weighted(&self.talpha_tau);
        let total = tau
            + weighted(&self.alpha_rho)
            + weighted(&self.alpha_zeta)
            + weighted(&self.talpha_rho)
            + weighted(&self.talpha_zeta);
        if total == T::zero() {
            T::zero()
        } else {
            (tau / total).sqrt()
        }
    }
}

fn part_field<T: Real>(g: &Grid2D<T>, coef: &[T], off: usize, part: Part, origin_vec: Option<(T, T)>) -> Field6<T> {
    let mut out = Field6::zeros(*g);
    let eps = origin_radius(g);
    for p in 0..g.len() {
        let (x1, x2) = g.point(p);
        let r = x1.hypot(x2);
        match part {
            Part::Zeta => out.comps[off + 2][p] = coef[p],
            _ if r <= eps => {
                if let (Part::Rho, Some((a, b))) = (part, origin_vec) {
                    out.comps[off][p] = a;
                    out.comps[off + 1][p] = b;
                }
            }
            Part::Rho => {
                out.comps[off][p] = coef[p] * x1 / r;
                out.comps[off + 1][p] = coef[p] * x2 / r;
            }
            Part::Tau => {
                out.comps[off][p] = -coef[p] * x2 / r;
                out.comps[off + 1][p] = coef[p] * x1 / r;
            }
        }
    }
    out
}

fn origin_vector<T: Real>(g: &Grid2D<T>, u: &Field6<T>, off: usize) -> Option<(T, T)> {
    let eps = origin_radius(g);
    (0..g.len())
        .find(|&p| g.radius(p) <= eps)
        .map(|p| (u.comps[off][p], u.comps[off + 1][p]))
}

/// Splits both profiles into radial, azimuthal and axial parts and extracts
/// the six radial coefficient profiles.
pub fn decompose_rtz<T: Real>(u: &Field6<T>) -> RtzSplit<T> {
    let g = *u.grid();
    let mut parts = Vec::with_capacity(6);
    let mut profiles = Vec::with_capacity(6);
    for off in [0, 3] {
        let ov = origin_vector(&g, u, off);
        for part in [Part::Rho, Part::Tau, Part::Zeta] {
            let c = coefficient(&g, u, off, part);
            parts.push(part_field(&g, &c, off, part, ov));
            profiles.push(match part {
                Part::Zeta => radial_bin(&g, &c),
                _ => radial_bin_vanishing(&g, &c),
            });
        }
    }
    let res = equivariance_residual(u, T::lit(0.6154797087));
    let mut pi = parts.into_iter();
    let mut pr = profiles.into_iter();
    let mut next = || (pi.next().expect("six parts"), pr.next().expect("six profiles"));
    let (u_rho, alpha_rho) = next();
    let (u_tau, alpha_tau) = next();
    let (u_zeta, alpha_zeta) = next();
    let (tu_rho, talpha_rho) = next();
    let (tu_tau, talpha_tau) = next();
    let (tu_zeta, talpha_zeta) = next();
    RtzSplit {
        u_rho,
        u_tau,
        u_zeta,
        tu_rho,
        tu_tau,
        tu_zeta,
        alpha_rho,
        alpha_tau,
        alpha_zeta,
        talpha_rho,
        talpha_tau,
        talpha_zeta,
        equivariance_residual: res,
        warning: res > T::lit(EQUIVARIANCE_TOL),
    }
}

fn tau_part<T: Real>(u: &Field6<T>, off: usize) -> Field6<T> {
    let g = *u.grid();
    let c = coefficient(&g, u, off, Part::Tau);
    part_field(&g, &c, off, Part::Tau, None)
}

/// `S u = u_ρ - u_τ + u_ζ`: flips the azimuthal part of the first profile.
pub fn apply_s<T: Real>(u: &Field6<T>) -> Field6<T> {
    let mut out = u.clone();
    out.axpy(-T::two(), &tau_part(u, 0));
    out
}

/// `S̃ u = ũ_ρ - ũ_τ + ũ_ζ`: flips the azimuthal part of the second profile.
pub fn apply_s_tilde<T: Real>(u: &Field6<T>) -> Field6<T> {
    let mut out = u.clone();
    out.axpy(-T::two(), &tau_part(u, 3));
    out
}

/// `(u + S u)/2 = u - u_τ`.
pub fn project_s<T: Real>(u: &Field6<T>) -> Field6<T> {
    u.sub(&tau_part(u, 0))
}

/// `(u + S̃ u)/2 = u - ũ_τ`.
pub fn project_s_tilde<T: Real>(u: &Field6<T>) -> Field6<T> {
    u.sub(&tau_part(u, 3))
}

/// Fixed-point projector of `-S` (keeps only `u_τ`); a diagnostic for the
/// purely azimuthal class of the first profile.
pub fn project_minus_s<T: Real>(u: &Field6<T>) -> Field6<T> {
    tau_part(u, 0)
}

/// Builds the equivariant field
/// `U = a_ρ x̂ + a_τ x̂^⊥ + a_ζ e₃`, `Ũ = ã_ρ x̂ + ã_τ x̂^⊥ + ã_ζ e₃`
/// from six radial coefficient functions `coef(r) -> [a_ρ, a_τ, a_ζ, ã_ρ, ã_τ, ã_ζ]`.
/// The in-plane parts are dropped at the origin.
pub fn equivariant_field<T: Real>(g: Grid2D<T>, coef: impl Fn(T) -> [T; 6]) -> Field6<T> {
    let eps = origin_radius(&g);
    Field6::from_fn(g, |x1, x2| {
        let r = x1.hypot(x2);
        let a = coef(r);
        let (c, s) = if r <= eps { (T::zero(), T::zero()) } else { (x1 / r, x2 / r) };
        [
            a[0] * c - a[1] * s,
            a[0] * s + a[1] * c,
            a[2],
            a[3] * c - a[4] * s,
            a[3] * s + a[4] * c,
            a[5],
        ]
    })
}

/// Curl `∇̊×` with exact trigonometric-interpolant derivatives; used to
/// test pointwise identities that the difference stencils only satisfy up
/// to their truncation error.
pub fn spectral_curl<T: Real>(spec: &Spectral<T>, u: &Field6<T>, k: T) -> Result<Field6<T>> {
    u.grid().check_same(spec.grid())?;
    let d = |c: usize, axis: usize| spec.spectral_derivative(&u.comps[c], axis);
    let comb = |a: Vec<T>, sa: T, b: &[T], sb: T| -> Vec<T> {
        a.iter().zip(b).map(|(&x, &y)| sa * x + sb * y).collect()
    };
    let one = T::one();
    let comps = [
        comb(d(2, 1), one, &u.comps[4], -k),
        comb(d(2, 0), -one, &u.comps[3], k),
        comb(d(1, 0), one, &d(0, 1), -one),
        comb(d(5, 1), one, &u.comps[1], k),
        comb(d(5, 0), -one, &u.comps[0], -k),
        comb(d(4, 0), one, &d(3, 1), -one),
    ];
    Field6::from_comps(*u.grid(), comps)
}

/// Pointwise `max_x |<a(x), b(x)>| / (max|a| · max|b|)`.
pub fn pointwise_inner_residual<T: Real>(a: &Field6<T>, b: &Field6<T>) -> T {
    let (na, nb) = (a.pointwise_norm(), b.pointwise_norm());
    let scale = na.iter().fold(T::zero(), |m, &x| m.max(x)) * nb.iter().fold(T::zero(), |m, &x| m.max(x));
    if scale == T::zero() {
        return T::zero();
    }
    (0..a.grid().len())
        .map(|p| {
            let (x, y) = (a.at(p), b.at(p));
            x.iter().zip(&y).fold(T::zero(), |s, (&u, &v)| s + u * v).abs()
        })
        .fold(T::zero(), |m, v| m.max(v))
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_is_orthogonal() {
        let m = RotationAngle(0.7f64).block();
        for r in 0..6 {
            for c in 0..6 {
                let s: f64 = (0..6).map(|k| m[k][r] * m[k][c]).sum();
                assert!((s - if r == c { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quarter_turns_compose_to_identity() {
        let g = Grid2D::square(16, 3.0f64).unwrap();
        let u = Field6::from_fn(g, |x, y| [x, y * y, x * y, 1.0, x - y, y]);
        assert_eq!(rot90(&u, 4).unwrap(), u);
        let r = rot90(&rot90(&u, 1).unwrap(), 3).unwrap();
        assert_eq!(r, u);
        assert_eq!(reflect(&reflect(&u).unwrap()).unwrap(), u);
    }
}
