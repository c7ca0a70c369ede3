//! Periodic 2D Fourier diagonalization of the central-difference stencils.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field6, Grid2D};
use crate::Real;

/// Cached FFT plans plus the discrete derivative symbols `sin(ξh)/h` of a grid.
pub struct Spectral<T: Real> {
    grid: Grid2D<T>,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    /// Central-difference symbol along x1, indexed by wavenumber.
    pub s1: Vec<T>,
    /// Central-difference symbol along x2.
    pub s2: Vec<T>,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: &Grid2D<T>) -> Self {
        let mut planner = FftPlanner::<T>::new();
        let (n1, n2) = (grid.n1(), grid.n2());
        let symbol = |n: usize| -> Vec<T> {
            (0..n)
                .map(|p| {
                    let theta = T::two() * T::PI() * T::from_usize_lossy(p) / T::from_usize_lossy(n);
                    theta.sin() / grid.h()
                })
                .collect()
        };
        Self {
            grid: *grid,
            row_fwd: planner.plan_fft_forward(n2),
            row_inv: planner.plan_fft_inverse(n2),
            col_fwd: planner.plan_fft_forward(n1),
            col_inv: planner.plan_fft_inverse(n1),
            s1: symbol(n1),
            s2: symbol(n2),
        }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex<T>], inverse: bool) {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        row.process(data);
        let mut t = vec![Complex::new(T::zero(), T::zero()); n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                t[j * n1 + i] = data[i * n2 + j];
            }
        }
        col.process(&mut t);
        for i in 0..n1 {
            for j in 0..n2 {
                data[i * n2 + j] = t[j * n1 + i];
            }
        }
    }

    pub fn forward(&self, f: &[T]) -> Vec<Complex<T>> {
        let mut d: Vec<Complex<T>> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.transform(&mut d, false);
        d
    }

    /// Inverse transform, returning the real part (scaled by `1/(n1 n2)`).
    pub fn inverse_real(&self, mut d: Vec<Complex<T>>) -> Vec<T> {
        self.transform(&mut d, true);
        let scale = T::one() / T::from_usize_lossy(self.grid.len());
        d.into_iter().map(|z| z.re * scale).collect()
    }

    /// `|ξ_d|^2 = s1^2 + s2^2` at flat spectral index `p`.
    #[inline]
    pub fn xi_sq(&self, p: usize) -> T {
        let (a, b) = self.grid.coords_of(p);
        self.s1[a] * self.s1[a] + self.s2[b] * self.s2[b]
    }

    /// Applies the real Fourier multiplier `m(|ξ_d|^2)` to a scalar field.
    pub fn apply_radial_multiplier(&self, f: &[T], m: impl Fn(T) -> T) -> Vec<T> {
        let mut d = self.forward(f);
        for (p, z) in d.iter_mut().enumerate() {
            *z = *z * m(self.xi_sq(p));
        }
        self.inverse_real(d)
    }

    /// Solves `(-Δ_d + shift) x = rhs` where `Δ_d = D1 D1 + D2 D2`; requires `shift > 0`.
    pub fn solve_shifted_laplacian(&self, rhs: &[T], shift: T) -> Vec<T> {
        self.apply_radial_multiplier(rhs, |q| T::one() / (q + shift))
    }

    /// True for modes with `|ξᵢh| ≤ π/2` on both axes, where the difference
    /// symbol `sin(ξh)/h` is monotone.
    pub fn resolved(&self, p: usize) -> bool {
        let (a, b) = self.grid.coords_of(p);
        let ok = |m: usize, n: usize| 4 * m.min(n - m) <= n;
        ok(a, self.grid.n1()) && ok(b, self.grid.n2())
    }

    /// Zeroes every mode outside the resolved band.
    pub fn low_pass(&self, f: &[T]) -> Vec<T> {
        let mut d = self.forward(f);
        for (p, z) in d.iter_mut().enumerate() {
            if !self.resolved(p) {
                *z = Complex::new(T::zero(), T::zero());
            }
        }
        self.inverse_real(d)
    }

    /// `Σ|f̂|²` outside and inside the resolved band.
    pub fn band_energy(&self, f: &[T]) -> (T, T) {
        let d = self.forward(f);
        d.iter().enumerate().fold((T::zero(), T::zero()), |(hi, lo), (p, z)| {
            if self.resolved(p) {
                (hi, lo + z.norm_sqr())
            } else {
                (hi + z.norm_sqr(), lo)
            }
        })
    }

    /// Exact spectral (trigonometric-interpolant) derivative along x1 or x2.
    pub fn spectral_derivative(&self, f: &[T], axis: usize) -> Vec<T> {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut d = self.forward(f);
        let wave = |p: usize, n: usize| -> T {
            // Nyquist mode carries no odd derivative information
            if 2 * p == n {
                return T::zero();
            }
            let k = if p <= n / 2 {
                T::from_usize_lossy(p)
            } else {
                -T::from_usize_lossy(n - p)
            };
            T::two() * T::PI() * k / (T::from_usize_lossy(n) * self.grid.h())
        };
        for (p, z) in d.iter_mut().enumerate() {
            let (a, b) = self.grid.coords_of(p);
            let kk = if axis == 0 { wave(a, n1) } else { wave(b, n2) };
            *z = Complex::new(-z.im * kk, z.re * kk);
        }
        self.inverse_real(d)
    }
}

// source modes feeding target index `q` along one axis of length `nb`
fn mode_map<T: Real>(q: usize, na: usize, nb: usize) -> Vec<(usize, T)> {
    let m = if 2 * q < nb { q as isize } else { q as isize - nb as isize };
    let (a, half_a, half_b) = (na as isize, na as isize / 2, nb as isize / 2);
    let wrap = |m: isize| m.rem_euclid(a) as usize;
    if na == nb || m.abs() < half_a.min(half_b) {
        return vec![(wrap(m), T::one())];
    }
    if nb > na {
        if m.abs() == half_a {
            return vec![(half_a as usize, T::half())];
        }
        return Vec::new();
    }
    // target Nyquist collects both source modes that alias onto it
    if m == -half_b {
        return vec![(wrap(half_b), T::one()), (wrap(-half_b), T::one())];
    }
    Vec::new()
}

/// Trigonometric interpolation of a scalar field onto another grid
/// covering the same periodic box.
pub fn resample<T: Real>(f: &[T], from: &Grid2D<T>, to: &Grid2D<T>) -> Result<Vec<T>> {
    let same = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * a.abs();
    if !same(from.half_width1(), to.half_width1()) || !same(from.half_width2(), to.half_width2()) {
        return Err(Error::Shape("resampling needs grids over the same box".into()));
    }
    if [from.n1(), from.n2(), to.n1(), to.n2()].iter().any(|n| n % 2 == 1) {
        return Err(Error::Shape("resampling needs even grid sizes".into()));
    }
    if f.len() != from.len() {
        return Err(Error::Shape("field length differs from grid size".into()));
    }
    let src = Spectral::new(from).forward(f);
    let dst = Spectral::new(to);
    let scale = T::from_usize_lossy(to.len()) / T::from_usize_lossy(from.len());
    let rows: Vec<Vec<(usize, T)>> = (0..to.n1()).map(|q| mode_map(q, from.n1(), to.n1())).collect();
    let cols: Vec<Vec<(usize, T)>> = (0..to.n2()).map(|q| mode_map(q, from.n2(), to.n2())).collect();
    let mut out = vec![Complex::new(T::zero(), T::zero()); to.len()];
    for (i, ri) in rows.iter().enumerate() {
        for (j, cj) in cols.iter().enumerate() {
            let mut z = Complex::new(T::zero(), T::zero());
            for &(a, wa) in ri {
                for &(b, wb) in cj {
                    z = z + src[from.idx(a, b)] * (wa * wb);
                }
            }
            out[to.idx(i, j)] = z * scale;
        }
    }
    Ok(dst.inverse_real(out))
}

/// [`resample`] applied to each component.
pub fn resample_field<T: Real>(u: &Field6<T>, to: Grid2D<T>) -> Result<Field6<T>> {
    let from = *u.grid();
    let comps = u.comps.iter().map(|c| resample(c, &from, &to)).collect::<Result<Vec<_>>>()?;
    let comps: [Vec<T>; 6] = comps.try_into().map_err(|_| Error::Shape("six components".into()))?;
    Field6::from_comps(to, comps)
}
