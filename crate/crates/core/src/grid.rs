//! Uniform periodic grids and the fields that live on them.
//!
//! Points are `x_ij = (-R1 + i h, -R2 + j h)` with `R = n h / 2`, stored
//! row-major with the `x1` index outermost (`idx = i * n2 + j`).

use crate::error::{Error, Result};
use crate::Real;

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D<T> {
    n1: usize,
    n2: usize,
    h: T,
}

impl<T: Real> Grid2D<T> {
    pub fn new(n1: usize, n2: usize, h: T) -> Result<Self> {
        if n1 < MIN_POINTS || n2 < MIN_POINTS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_POINTS} points per axis, got {n1}x{n2}"
            )));
        }
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Self { n1, n2, h })
    }

    /// Square `n x n` grid covering `[-half_width, half_width)^2`.
    pub fn square(n: usize, half_width: T) -> Result<Self> {
        let h = T::two() * half_width / T::from_usize_lossy(n.max(1));
        Self::new(n, n, h)
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }
    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }
    #[inline]
    pub fn h(&self) -> T {
        self.h
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Quadrature weight of a single cell.
    #[inline]
    pub fn cell_area(&self) -> T {
        self.h * self.h
    }
    pub fn half_width1(&self) -> T {
        T::from_usize_lossy(self.n1) * self.h * T::half()
    }
    pub fn half_width2(&self) -> T {
        T::from_usize_lossy(self.n2) * self.h * T::half()
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }
    #[inline]
    pub fn coords_of(&self, p: usize) -> (usize, usize) {
        (p / self.n2, p % self.n2)
    }
    #[inline]
    pub fn x1(&self, i: usize) -> T {
        -self.half_width1() + T::from_usize_lossy(i) * self.h
    }
    #[inline]
    pub fn x2(&self, j: usize) -> T {
        -self.half_width2() + T::from_usize_lossy(j) * self.h
    }
    #[inline]
    pub fn point(&self, p: usize) -> (T, T) {
        let (i, j) = self.coords_of(p);
        (self.x1(i), self.x2(j))
    }
    #[inline]
    pub fn radius(&self, p: usize) -> T {
        let (x, y) = self.point(p);
        x.hypot(y)
    }
    /// Periodic index shift along x1.
    #[inline]
    pub fn wrap1(&self, i: isize) -> usize {
        i.rem_euclid(self.n1 as isize) as usize
    }
    #[inline]
    pub fn wrap2(&self, j: isize) -> usize {
        j.rem_euclid(self.n2 as isize) as usize
    }
    /// Index of the grid point closest to the origin.
    pub fn origin_index(&self) -> usize {
        self.idx(self.n1 / 2, self.n2 / 2)
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!(
                "grid {}x{} (h={}) vs {}x{} (h={})",
                self.n1, self.n2, self.h, other.n1, other.n2, other.h
            )));
        }
        Ok(())
    }
}

/// Six real components per grid point, ordered `(U1, U2, U3, Ũ1, Ũ2, Ũ3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field6<T> {
    grid: Grid2D<T>,
    pub comps: [Vec<T>; 6],
}

impl<T: Real> Field6<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        let n = grid.len();
        Self {
            grid,
            comps: std::array::from_fn(|_| vec![T::zero(); n]),
        }
    }

    pub fn from_comps(grid: Grid2D<T>, comps: [Vec<T>; 6]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Shape("component length differs from grid size".into()));
        }
        Ok(Self { grid, comps })
    }

    /// Samples `f(x1, x2)` at every grid point.
    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> [T; 6]) -> Self {
        let mut out = Self::zeros(grid);
        for p in 0..grid.len() {
            let (x, y) = grid.point(p);
            let v = f(x, y);
            for c in 0..6 {
                out.comps[c][p] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    #[inline]
    pub fn at(&self, p: usize) -> [T; 6] {
        std::array::from_fn(|c| self.comps[c][p])
    }

    #[inline]
    pub fn set(&mut self, p: usize, v: [T; 6]) {
        for (c, x) in v.into_iter().enumerate() {
            self.comps[c][p] = x;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    /// Pointwise `|u| = (|U|^2 + |Ũ|^2)^{1/2}`.
    pub fn pointwise_norm(&self) -> Vec<T> {
        (0..self.grid.len())
            .map(|p| {
                self.comps
                    .iter()
                    .map(|c| c[p] * c[p])
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .collect()
    }

    /// Discrete `L^2` inner product `h^2 Σ <u, v>`.
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.grid, other.grid);
        let mut s = T::zero();
        for c in 0..6 {
            s = s + self.comps[c]
                .iter()
                .zip(&other.comps[c])
                .map(|(&a, &b)| a * b)
                .fold(T::zero(), |a, b| a + b);
        }
        s * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = self.clone();
        out.scale_mut(a);
        out
    }

    pub fn scale_mut(&mut self, a: T) {
        for c in self.comps.iter_mut() {
            for x in c.iter_mut() {
                *x = *x * a;
            }
        }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: T, x: &Self) {
        debug_assert_eq!(self.grid, x.grid);
        for c in 0..6 {
            for (s, &v) in self.comps[c].iter_mut().zip(&x.comps[c]) {
                *s = *s + a * v;
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(T::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    /// Pointwise multiplication by a scalar field.
    pub fn mul_scalar_field(&self, s: &[T]) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (x, &w) in c.iter_mut().zip(s) {
                *x = *x * w;
            }
        }
        out
    }
}

/// A pair of scalar potentials `(α, α̃)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPair<T> {
    grid: Grid2D<T>,
    pub a: Vec<T>,
    pub at: Vec<T>,
}

impl<T: Real> ScalarPair<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self {
            grid,
            a: vec![T::zero(); grid.len()],
            at: vec![T::zero(); grid.len()],
        }
    }

    pub fn new(grid: Grid2D<T>, a: Vec<T>, at: Vec<T>) -> Result<Self> {
        if a.len() != grid.len() || at.len() != grid.len() {
            return Err(Error::Shape("potential length differs from grid size".into()));
        }
        Ok(Self { grid, a, at })
    }

    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> (T, T)) -> Self {
        let mut out = Self::zeros(grid);
        for p in 0..grid.len() {
            let (x, y) = grid.point(p);
            let (a, at) = f(x, y);
            out.a[p] = a;
            out.at[p] = at;
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn max_abs(&self) -> T {
        self.a
            .iter()
            .chain(&self.at)
            .fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn dot(&self, other: &Self) -> T {
        let s = self
            .a
            .iter()
            .zip(&other.a)
            .chain(self.at.iter().zip(&other.at))
            .map(|(&x, &y)| x * y)
            .fold(T::zero(), |a, b| a + b);
        s * self.grid.cell_area()
    }

    pub fn axpy(&mut self, s: T, x: &Self) {
        for (d, &v) in self.a.iter_mut().zip(&x.a) {
            *d = *d + s * v;
        }
        for (d, &v) in self.at.iter_mut().zip(&x.at) {
            *d = *d + s * v;
        }
    }
}

/// Scalar function of `r` sampled on a 1D radial mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T> {
    pub r: Vec<T>,
    pub value: Vec<T>,
    /// Spread of the samples that produced each value (zero for exact profiles).
    pub stddev: Vec<T>,
}

impl<T: Real> RadialProfile<T> {
    pub fn new(r: Vec<T>, value: Vec<T>) -> Self {
        let stddev = vec![T::zero(); r.len()];
        Self { r, value, stddev }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Piecewise-linear interpolation; constant extrapolation outside the mesh.
    pub fn eval(&self, r: T) -> T {
        let n = self.r.len();
        if n == 0 {
            return T::zero();
        }
        if r <= self.r[0] {
            return self.value[0];
        }
        if r >= self.r[n - 1] {
            return self.value[n - 1];
        }
        let k = self.r.partition_point(|&x| x <= r).clamp(1, n - 1);
        let (r0, r1) = (self.r[k - 1], self.r[k]);
        let t = (r - r0) / (r1 - r0);
        self.value[k - 1] * (T::one() - t) + self.value[k] * t
    }

    /// Slope of the piecewise-linear interpolant (centered at interior nodes).
    pub fn derivative(&self, r: T) -> T {
        let n = self.r.len();
        if n < 2 {
            return T::zero();
        }
        let k = self.r.partition_point(|&x| x <= r).clamp(1, n - 1);
        (self.value[k] - self.value[k - 1]) / (self.r[k] - self.r[k - 1])
    }

    pub fn max_abs(&self) -> T {
        self.value.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}
