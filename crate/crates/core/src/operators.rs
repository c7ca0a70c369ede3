//! Discrete `∇̊`, `∇̊×`, the curl-curl operator `L`, its Fourier symbol and
//! the splitting of a grid field into a divergence-constrained part and a
//! kernel (gradient) part.
//!
//! Every derivative is the periodic central difference
//! `(f[i+1] - f[i-1]) / 2h`. Using one stencil family everywhere makes
//! `∇̊×∇̊ = 0` hold exactly and turns `L` into `(∇̊×)ᵀ ∇̊×` with a symmetric
//! summation-by-parts structure.

use nalgebra::{Matrix6, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{Field6, Grid2D, ScalarPair};
use crate::Real;

pub(crate) fn check_k<T: Real>(k: T) -> Result<()> {
    if k == T::zero() || !k.is_finite() {
        return Err(Error::Config(format!("wave number k must be finite and nonzero, got {k}")));
    }
    Ok(())
}

/// Central difference along x1.
pub fn d1<T: Real>(g: &Grid2D<T>, f: &[T]) -> Vec<T> {
    let (n1, n2) = (g.n1(), g.n2());
    let s = T::half() / g.h();
    let mut out = vec![T::zero(); f.len()];
    for i in 0..n1 {
        let ip = (i + 1) % n1;
        let im = (i + n1 - 1) % n1;
        for j in 0..n2 {
            out[i * n2 + j] = (f[ip * n2 + j] - f[im * n2 + j]) * s;
        }
    }
    out
}

/// Central difference along x2.
pub fn d2<T: Real>(g: &Grid2D<T>, f: &[T]) -> Vec<T> {
    let (n1, n2) = (g.n1(), g.n2());
    let s = T::half() / g.h();
    let mut out = vec![T::zero(); f.len()];
    for i in 0..n1 {
        let row = i * n2;
        for j in 0..n2 {
            let jp = (j + 1) % n2;
            let jm = (j + n2 - 1) % n2;
            out[row + j] = (f[row + jp] - f[row + jm]) * s;
        }
    }
    out
}

fn lin<T: Real>(terms: &[(T, &[T])]) -> Vec<T> {
    let n = terms[0].1.len();
    let mut out = vec![T::zero(); n];
    for (a, v) in terms {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            *o = *o + *a * x;
        }
    }
    out
}

/// `∇̊(α, α̃) = (∂1α, ∂2α, kα̃, ∂1α̃, ∂2α̃, -kα)`.
pub fn circ_grad<T: Real>(p: &ScalarPair<T>, k: T) -> Result<Field6<T>> {
    check_k(k)?;
    let g = *p.grid();
    let comps = [
        d1(&g, &p.a),
        d2(&g, &p.a),
        lin(&[(k, &p.at)]),
        d1(&g, &p.at),
        d2(&g, &p.at),
        lin(&[(-k, &p.a)]),
    ];
    Field6::from_comps(g, comps)
}

/// `∇̊×(β, β̃)`.
pub fn circ_curl<T: Real>(u: &Field6<T>, k: T) -> Result<Field6<T>> {
    check_k(k)?;
    let g = *u.grid();
    let [b1, b2, b3, c1, c2, c3] = &u.comps;
    let one = T::one();
    let comps = [
        lin(&[(one, &d2(&g, b3)), (-k, c2)]),
        lin(&[(k, c1), (-one, &d1(&g, b3))]),
        lin(&[(one, &d1(&g, b2)), (-one, &d2(&g, b1))]),
        lin(&[(one, &d2(&g, c3)), (k, b2)]),
        lin(&[(-k, b1), (-one, &d1(&g, c3))]),
        lin(&[(one, &d1(&g, c2)), (-one, &d2(&g, c1))]),
    ];
    Field6::from_comps(g, comps)
}

/// The two divergence constraints of the space `V`:
/// `∂1u1 + ∂2u2 + kũ3` and `∂1ũ1 + ∂2ũ2 - ku3`.
pub fn divergences<T: Real>(u: &Field6<T>, k: T) -> (Vec<T>, Vec<T>) {
    let g = *u.grid();
    let [u1, u2, u3, v1, v2, v3] = &u.comps;
    let one = T::one();
    let div1 = lin(&[(one, &d1(&g, u1)), (one, &d2(&g, u2)), (k, v3)]);
    let div2 = lin(&[(one, &d1(&g, v1)), (one, &d2(&g, v2)), (-k, u3)]);
    (div1, div2)
}

/// Adjoint of `∇̊` in the discrete `L^2` pairing: `∇̊ᵀ z = -(div1 z, div2 z)`.
pub fn circ_grad_adjoint<T: Real>(z: &Field6<T>, k: T) -> ScalarPair<T> {
    let (a, b) = divergences(z, k);
    let neg = |v: Vec<T>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
    ScalarPair::new(*z.grid(), neg(a), neg(b)).expect("same grid")
}

/// Applies the 6x6 operator `L` through its explicit second-order stencil.
pub fn apply_l<T: Real>(u: &Field6<T>, k: T) -> Result<Field6<T>> {
    check_k(k)?;
    let g = *u.grid();
    let (n1, n2) = (g.n1(), g.n2());
    let h = g.h();
    let c1 = T::half() / h;
    let c2 = T::lit(0.25) / (h * h);
    let kk = k * k;
    let mut out = Field6::zeros(g);
    let [u1, u2, u3, v1, v2, v3] = &u.comps;
    for i in 0..n1 {
        let ip = (i + 1) % n1;
        let im = (i + n1 - 1) % n1;
        let ipp = (i + 2) % n1;
        let imm = (i + 2 * n1 - 2) % n1;
        for j in 0..n2 {
            let jp = (j + 1) % n2;
            let jm = (j + n2 - 1) % n2;
            let jpp = (j + 2) % n2;
            let jmm = (j + 2 * n2 - 2) % n2;
            let at = |f: &[T], a: usize, b: usize| f[a * n2 + b];
            let dx = |f: &[T]| (at(f, ip, j) - at(f, im, j)) * c1;
            let dy = |f: &[T]| (at(f, i, jp) - at(f, i, jm)) * c1;
            let dxx = |f: &[T]| (at(f, ipp, j) - T::two() * at(f, i, j) + at(f, imm, j)) * c2;
            let dyy = |f: &[T]| (at(f, i, jpp) - T::two() * at(f, i, j) + at(f, i, jmm)) * c2;
            let dxy = |f: &[T]| {
                (at(f, ip, jp) - at(f, ip, jm) - at(f, im, jp) + at(f, im, jm)) * c2
            };
            let p = i * n2 + j;
            let r = [
                -dyy(u1) + kk * u1[p] + dxy(u2) + k * dx(v3),
                dxy(u1) - dxx(u2) + kk * u2[p] + k * dy(v3),
                -dxx(u3) - dyy(u3) + k * dx(v1) + k * dy(v2),
                -k * dx(u3) - dyy(v1) + kk * v1[p] + dxy(v2),
                -k * dy(u3) + dxy(v1) - dxx(v2) + kk * v2[p],
                -k * dx(u1) - k * dy(u2) - dxx(v3) - dyy(v3),
            ];
            out.set(p, r);
        }
    }
    Ok(out)
}

/// `L` computed as `∇̊×∇̊×`.
pub fn apply_l_composed<T: Real>(u: &Field6<T>, k: T) -> Result<Field6<T>> {
    circ_curl(&circ_curl(u, k)?, k)
}

/// Real symmetric form of the Fourier symbol of `L` at frequency `ξ`.
///
/// The complex symbol is Hermitian; conjugating by `diag(1,1,1,i,i,i)` makes
/// it real. A real plane wave `U = a_U cos(ξ·x)`, `Ũ = -a_Ũ sin(ξ·x)` is
/// mapped by `L` to the same pattern with amplitudes `symbol · a`, where the
/// discrete operator uses `ξ_d = sin(ξh)/h` componentwise.
pub fn symbol_l<T: Real>(xi: [T; 2], k: T) -> [[T; 6]; 6] {
    let [a, b] = xi;
    let z = T::zero();
    let kk = k * k;
    [
        [b * b + kk, -a * b, z, z, z, -k * a],
        [-a * b, a * a + kk, z, z, z, -k * b],
        [z, z, a * a + b * b, -k * a, -k * b, z],
        [z, z, -k * a, b * b + kk, -a * b, z],
        [z, z, -k * b, -a * b, a * a + kk, z],
        [-k * a, -k * b, z, z, z, a * a + b * b],
    ]
}

/// Eigenvalues of [`symbol_l`] in ascending order.
pub fn symbol_eigenvalues<T: Real>(xi: [T; 2], k: T) -> [T; 6] {
    let s = symbol_l(xi, k);
    let m = Matrix6::from_fn(|r, c| s[r][c].as_f64());
    let eig = SymmetricEigen::new(m);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    std::array::from_fn(|i| T::lit(ev[i]))
}

/// Discrete wavenumber `sin(ξh)/h` seen by the central-difference stencil.
pub fn discrete_wavenumber<T: Real>(xi: T, h: T) -> T {
    (xi * h).sin() / h
}

/// Result of splitting a field into `v ∈ V` and `w = ∇̊(α, α̃) ∈ ker L`.
#[derive(Debug, Clone)]
pub struct HelmholtzSplit<T> {
    pub v: Field6<T>,
    pub w: Field6<T>,
    pub potentials: ScalarPair<T>,
}

/// Kernel potentials of `u`: solves `(-Δ_d + k²) α = -div1 u` and
/// `(-Δ_d + k²) α̃ = -div2 u` by FFT.
pub fn kernel_potentials<T: Real>(spec: &Spectral<T>, u: &Field6<T>, k: T) -> ScalarPair<T> {
    let (div1, div2) = divergences(u, k);
    let kk = k * k;
    let neg = |v: Vec<T>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
    let a = spec.solve_shifted_laplacian(&neg(div1), kk);
    let at = spec.solve_shifted_laplacian(&neg(div2), kk);
    ScalarPair::new(*u.grid(), a, at).expect("same grid")
}

pub fn helmholtz_split_with<T: Real>(
    spec: &Spectral<T>,
    u: &Field6<T>,
    k: T,
) -> Result<HelmholtzSplit<T>> {
    check_k(k)?;
    u.grid().check_same(spec.grid())?;
    let potentials = kernel_potentials(spec, u, k);
    let w = circ_grad(&potentials, k)?;
    let v = u.sub(&w);
    Ok(HelmholtzSplit { v, w, potentials })
}

/// Splits `u = v + w` with `v` satisfying both divergence constraints and
/// `w` in the range of `∇̊`; the two parts are `L^2`-orthogonal.
pub fn helmholtz_split<T: Real>(u: &Field6<T>, k: T) -> Result<HelmholtzSplit<T>> {
    let spec = Spectral::new(u.grid());
    helmholtz_split_with(&spec, u, k)
}

/// `b_L(u, v) = h² Σ <∇̊×u, ∇̊×v>`.
pub fn bilinear_bl<T: Real>(u: &Field6<T>, v: &Field6<T>, k: T) -> Result<T> {
    u.grid().check_same(v.grid())?;
    let cu = circ_curl(u, k)?;
    if std::ptr::eq(u, v) {
        return Ok(cu.dot(&cu));
    }
    let cv = circ_curl(v, k)?;
    Ok(cu.dot(&cv))
}

/// Discrete `H¹`-type norm `Σ_i |∇_d u_i|² + k²|u_i|²` (squared).
pub fn v_norm_sq<T: Real>(u: &Field6<T>, k: T) -> T {
    let g = *u.grid();
    let mut s = T::zero();
    for c in &u.comps {
        let a = d1(&g, c);
        let b = d2(&g, c);
        for p in 0..g.len() {
            s = s + a[p] * a[p] + b[p] * b[p] + k * k * c[p] * c[p];
        }
    }
    s * g.cell_area()
}
