//! The action `J(u) = ½ b_L(u,u) - ½∫V|u|² - ∫F(u)`, its reduction to the
//! divergence-constrained part `v` through the convex inner problem over
//! kernel potentials, and critical-point searches for TM modes.
//!
//! All searches run in the class of fields whose only nonzero components are
//! `(U1, U2, Ũ3)`: `U = α(r) x/|x|`, `Ũ = γ̃(r) e3`. This is the fixed space
//! of `diag(1,1,-1,-1,-1,1)`, which commutes with `L` (the operator splits
//! into the blocks `{1,2,6}` and `{3,4,5}`) and leaves `|u|` unchanged, so
//! critical points of the restricted functional solve the full equation.
//! The class lies inside the doubly fixed space (no τ parts), and every
//! operation used below maps it into itself.

mod inner;
mod search;

pub use inner::{inner_minimize, inner_minimize_from, kkt_residual, InnerOptions, InnerSolution};
pub use search::{
    certify, class_seed, higher_state_search, kerr_rescale, lmm_search, measure_state, mountain_pass_search, newton_polish,
    CriticalPoint, NewtonReport, SearchOutcome, SolverOptions, StateProfiles,
};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{Field6, Grid2D, ScalarPair};
use crate::operators::{apply_l, bilinear_bl, check_k, circ_grad, helmholtz_split_with, v_norm_sq, HelmholtzSplit};
use crate::orlicz::Nonlinearity;
use crate::Real;

/// Radial permittivity term `V(r)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PermittivityKind<T> {
    Constant { value: T },
    /// `a + b e^{-r²}`
    Bump { a: T, b: T },
}

impl<T: Real> PermittivityKind<T> {
    pub fn eval(&self, r: T) -> T {
        match *self {
            PermittivityKind::Constant { value } => value,
            PermittivityKind::Bump { a, b } => a + b * (-r * r).exp(),
        }
    }

    /// `(inf V, sup V)` over the plane.
    pub fn bounds(&self) -> (T, T) {
        match *self {
            PermittivityKind::Constant { value } => (value, value),
            PermittivityKind::Bump { a, b } => (a.min(a + b), a.max(a + b)),
        }
    }
}

/// `V` sampled on a grid, validated against assumption (V).
#[derive(Debug, Clone)]
pub struct PermittivityProfile<T> {
    pub kind: PermittivityKind<T>,
    pub values: Vec<T>,
    pub inf: T,
    pub sup: T,
}

impl<T: Real> PermittivityProfile<T> {
    pub fn new(kind: PermittivityKind<T>, grid: &Grid2D<T>, k: T) -> Result<Self> {
        let (inf, sup) = kind.bounds();
        if !inf.is_finite() || !sup.is_finite() || !(inf > T::zero()) {
            return Err(Error::Config(format!(
                "assumption (V) violated: V must be bounded away from 0, got inf V = {inf}"
            )));
        }
        if !(sup < k * k) {
            return Err(Error::Config(format!(
                "assumption (V) violated: esssup V = {sup} must be < k² = {}",
                k * k
            )));
        }
        let values = (0..grid.len()).map(|p| kind.eval(grid.radius(p))).collect();
        Ok(Self { kind, values, inf, sup })
    }

    pub fn mean(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(self.values.len())
    }
}

/// Everything fixed during a solve: grid, `k`, `ω`, `V` and `F`.
pub struct TmProblem<T: Real> {
    pub grid: Grid2D<T>,
    pub k: T,
    pub omega: T,
    pub permittivity: PermittivityProfile<T>,
    pub nonlinearity: Nonlinearity<T>,
    spec: Spectral<T>,
}

impl<T: Real> std::fmt::Debug for TmProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TmProblem")
            .field("grid", &self.grid)
            .field("k", &self.k)
            .field("omega", &self.omega)
            .field("permittivity", &self.permittivity.kind)
            .field("nonlinearity", &self.nonlinearity.kind)
            .finish()
    }
}

impl<T: Real> TmProblem<T> {
    pub fn new(grid: Grid2D<T>, k: T, omega: T, v: PermittivityKind<T>, nonlinearity: Nonlinearity<T>) -> Result<Self> {
        check_k(k)?;
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::Config(format!("ω must be positive, got {omega}")));
        }
        let permittivity = PermittivityProfile::new(v, &grid, k)?;
        Ok(Self { spec: Spectral::new(&grid), grid, k, omega, permittivity, nonlinearity })
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.spec
    }

    /// Same physics on another grid.
    pub fn regrid(&self, grid: Grid2D<T>) -> Result<Self> {
        Self::new(grid, self.k, self.omega, self.permittivity.kind, self.nonlinearity.clone())
    }

    /// `V u + f(u)`.
    pub fn vu_plus_f(&self, u: &Field6<T>) -> Field6<T> {
        let mut out = Field6::zeros(self.grid);
        for p in 0..self.grid.len() {
            let x = u.at(p);
            let f = self.nonlinearity.f(&x);
            let v = self.permittivity.values[p];
            out.set(p, std::array::from_fn(|c| v * x[c] + f[c]));
        }
        out
    }

    /// `(V + f'(u)) d`.
    pub fn linearized(&self, u: &Field6<T>, d: &Field6<T>) -> Field6<T> {
        let mut out = Field6::zeros(self.grid);
        for p in 0..self.grid.len() {
            let x = u.at(p);
            let y = d.at(p);
            let h = self.nonlinearity.hessian_apply(&x, &y);
            let v = self.permittivity.values[p];
            out.set(p, std::array::from_fn(|c| v * y[c] + h[c]));
        }
        out
    }

    /// `h² Σ (½V|u|² + F(u))`.
    pub fn potential_energy(&self, u: &Field6<T>) -> T {
        let mut s = T::zero();
        for p in 0..self.grid.len() {
            let x = u.at(p);
            let n2 = x.iter().fold(T::zero(), |a, &b| a + b * b);
            s = s + T::half() * self.permittivity.values[p] * n2 + self.nonlinearity.big_f(&x);
        }
        s * self.grid.cell_area()
    }

    pub fn split(&self, u: &Field6<T>) -> Result<HelmholtzSplit<T>> {
        helmholtz_split_with(&self.spec, u, self.k)
    }

    pub fn project_v(&self, u: &Field6<T>) -> Result<Field6<T>> {
        Ok(self.split(u)?.v)
    }

    pub fn project_w(&self, u: &Field6<T>) -> Result<Field6<T>> {
        Ok(self.split(u)?.w)
    }

    /// Componentwise `(-Δ_d + shift)⁻¹`.
    pub fn shifted_inverse(&self, u: &Field6<T>, shift: T) -> Field6<T> {
        let comps = std::array::from_fn(|c| {
            if u.comps[c].iter().all(|x| *x == T::zero()) {
                vec![T::zero(); self.grid.len()]
            } else {
                self.spec.solve_shifted_laplacian(&u.comps[c], shift)
            }
        });
        Field6::from_comps(self.grid, comps).expect("same grid")
    }

    pub(crate) fn shifted_inverse_pair(&self, p: &ScalarPair<T>, shift: T) -> ScalarPair<T> {
        let solve = |v: &[T]| {
            if v.iter().all(|x| *x == T::zero()) {
                vec![T::zero(); v.len()]
            } else {
                self.spec.solve_shifted_laplacian(v, shift)
            }
        };
        ScalarPair::new(self.grid, solve(&p.a), solve(&p.at)).expect("same grid")
    }

    /// Discrete `H¹` norm, the norm of the space `V`.
    pub fn norm(&self, v: &Field6<T>) -> T {
        v_norm_sq(v, self.k).sqrt()
    }

    /// Dual norm `⟨r, (-Δ_d + k²)⁻¹ r⟩^{1/2}` of a residual.
    pub fn dual_norm(&self, r: &Field6<T>) -> T {
        r.dot(&self.shifted_inverse(r, self.k * self.k)).max(T::zero()).sqrt()
    }

    /// Removes the modes outside `|ξᵢh| ≤ π/2`, where central differences
    /// see a second copy of the low frequencies.
    pub fn low_pass(&self, u: &Field6<T>) -> Field6<T> {
        let comps = std::array::from_fn(|c| {
            if u.comps[c].iter().all(|x| *x == T::zero()) {
                vec![T::zero(); self.grid.len()]
            } else {
                self.spec.low_pass(&u.comps[c])
            }
        });
        Field6::from_comps(self.grid, comps).expect("same grid")
    }

    /// Share of `‖u‖²` carried by the modes removed by [`Self::low_pass`].
    pub fn spectral_tail(&self, u: &Field6<T>) -> T {
        let (hi, lo) = u.comps.iter().fold((T::zero(), T::zero()), |(h, l), c| {
            let (a, b) = self.spec.band_energy(c);
            (h + a, l + b)
        });
        if hi + lo == T::zero() {
            T::zero()
        } else {
            hi / (hi + lo)
        }
    }

    /// True when only `U1`, `U2`, `Ũ3` are nonzero.
    pub fn in_class(u: &Field6<T>) -> bool {
        [2, 3, 4].iter().all(|&c| u.comps[c].iter().all(|x| *x == T::zero()))
    }
}

/// `u = v + w` with `w = ∇̊p`.
#[derive(Debug, Clone)]
pub struct StateDecomp<T> {
    pub v: Field6<T>,
    pub p: ScalarPair<T>,
    pub w: Field6<T>,
    pub u: Field6<T>,
}

impl<T: Real> StateDecomp<T> {
    pub fn assemble(v: Field6<T>, p: ScalarPair<T>, k: T) -> Result<Self> {
        let w = circ_grad(&p, k)?;
        let u = v.add(&w);
        Ok(Self { v, p, w, u })
    }

    pub fn zero(grid: Grid2D<T>) -> Self {
        Self { v: Field6::zeros(grid), p: ScalarPair::zeros(grid), w: Field6::zeros(grid), u: Field6::zeros(grid) }
    }
}

/// `J(u) = ½ b_L(u,u) - ½∫V|u|² - ∫F(u)`.
pub fn action_j<T: Real>(prob: &TmProblem<T>, u: &Field6<T>) -> Result<T> {
    Ok(T::half() * bilinear_bl(u, u, prob.k)? - prob.potential_energy(u))
}

/// `L²` gradient `Lu - Vu - f(u)`.
pub fn grad_j<T: Real>(prob: &TmProblem<T>, u: &Field6<T>) -> Result<Field6<T>> {
    let mut r = apply_l(u, prob.k)?;
    r.axpy(-T::one(), &prob.vu_plus_f(u));
    Ok(r)
}

/// One evaluation of the reduced functional.
#[derive(Debug, Clone)]
pub struct ReducedEval<T> {
    pub state: StateDecomp<T>,
    pub value: T,
    /// `P_V` of the full gradient.
    pub grad: Field6<T>,
    /// Full gradient `Lu - Vu - f(u)`.
    pub residual: Field6<T>,
    pub kkt: T,
}

pub fn reduced_eval<T: Real>(
    prob: &TmProblem<T>,
    v: &Field6<T>,
    warm: Option<&ScalarPair<T>>,
    opts: &InnerOptions<T>,
) -> Result<ReducedEval<T>> {
    let p0 = warm.cloned().unwrap_or_else(|| ScalarPair::zeros(prob.grid));
    let sol = inner_minimize_from(prob, v, p0, opts)?;
    let state = StateDecomp { v: v.clone(), p: sol.p, w: sol.w, u: sol.u };
    let value = action_j(prob, &state.u)?;
    let residual = grad_j(prob, &state.u)?;
    let grad = prob.project_v(&residual)?;
    Ok(ReducedEval { state, value, grad, residual, kkt: sol.kkt })
}

/// `J̃(v) = J(v + w(v))`.
pub fn reduced_j<T: Real>(prob: &TmProblem<T>, v: &Field6<T>) -> Result<T> {
    Ok(reduced_eval(prob, v, None, &InnerOptions::default())?.value)
}

/// `P_V ∇J(v + w(v))`; no derivative of `w(v)` is needed since `w(v)` is a
/// minimizer.
pub fn reduced_grad<T: Real>(prob: &TmProblem<T>, v: &Field6<T>) -> Result<Field6<T>> {
    Ok(reduced_eval(prob, v, None, &InnerOptions::default())?.grad)
}

/// `(1 + ‖v‖)‖J̃'(v)‖` in the norm of `V` and its dual.
pub fn cerami_residual<T: Real>(prob: &TmProblem<T>, v: &Field6<T>) -> Result<T> {
    let g = reduced_grad(prob, v)?;
    Ok((T::one() + prob.norm(v)) * prob.dual_norm(&g))
}
