//! N-functions, complementary (Legendre-type) functions, growth conditions,
//! Luxemburg norms and the nonlinearities `F`, `f = F'` fed to the solver.
//!
//! Two power conventions coexist and are kept apart by [`PowerScale`]:
//! `Φ(t) = |t|^p / p` is the primitive used for nonlinearities, while
//! `Φ(t) = |t|^p` is the one whose Luxemburg norm equals the `L^p` norm.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Field6;
use crate::quad::integrate_geometric;
use crate::Real;

/// Number of log-spaced samples used to certify global conditions.
pub const CONDITION_SAMPLES: usize = 481;
pub const CONDITION_T_MIN: f64 = 1e-6;
pub const CONDITION_T_MAX: f64 = 1e6;
/// `∇₂` requires `κ' > 1 + NABLA2_MARGIN`.
pub const NABLA2_MARGIN: f64 = 1e-6;

const ROOT_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerScale {
    /// `|t|^p / p`
    OverP,
    /// `|t|^p`
    Unit,
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum NFunctionKind<T: Real> {
    Power { p: T, scale: PowerScale },
    /// Primitive of `s^{p-1} ln 2` on `[0,1]` and `s^{q-1} ln(1+s)` beyond.
    LogType { p: T, q: T },
    /// `Φ(t) = t^4`, the N-function controlling the Kerr nonlinearity.
    Kerr,
    Custom {
        name: String,
        phi: ScalarFn<T>,
        dphi: ScalarFn<T>,
    },
    /// Complementary function of the boxed N-function.
    Complementary(Box<NFunction<T>>),
}

impl<T: Real> fmt::Debug for NFunctionKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { p, scale } => write!(f, "Power {{ p: {p}, scale: {scale:?} }}"),
            Self::LogType { p, q } => write!(f, "LogType {{ p: {p}, q: {q} }}"),
            Self::Kerr => write!(f, "Kerr"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
            Self::Complementary(inner) => write!(f, "Complementary({:?})", inner.kind),
        }
    }
}

/// An even, convex, superlinear function `Φ` with derivative `Φ'`.
#[derive(Clone, Debug)]
pub struct NFunction<T: Real> {
    pub kind: NFunctionKind<T>,
}

fn finite<T: Real>(t: T) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite argument {t}")))
    }
}

impl<T: Real> NFunction<T> {
    pub fn power(p: T, scale: PowerScale) -> Result<Self> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::Config(format!("power N-function needs p > 1, got {p}")));
        }
        Ok(Self { kind: NFunctionKind::Power { p, scale } })
    }

    pub fn log_type(p: T, q: T) -> Result<Self> {
        if !(p > T::two()) || !(q > T::two()) {
            return Err(Error::Config(format!("log-type N-function needs p, q > 2, got p={p}, q={q}")));
        }
        Ok(Self { kind: NFunctionKind::LogType { p, q } })
    }

    pub fn kerr() -> Self {
        Self { kind: NFunctionKind::Kerr }
    }

    pub fn custom(
        name: impl Into<String>,
        phi: impl Fn(T) -> T + Send + Sync + 'static,
        dphi: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: NFunctionKind::Custom {
                name: name.into(),
                phi: Arc::new(phi),
                dphi: Arc::new(dphi),
            },
        }
    }

    /// `Φ(t)`; even in `t`.
    pub fn eval(&self, t: T) -> Result<T> {
        finite(t)?;
        let a = t.abs();
        Ok(match &self.kind {
            NFunctionKind::Power { p, scale } => {
                let v = a.powf(*p);
                match scale {
                    PowerScale::OverP => v / *p,
                    PowerScale::Unit => v,
                }
            }
            NFunctionKind::LogType { p, q } => log_type_phi(*p, *q, a),
            NFunctionKind::Kerr => a.powi(4),
            NFunctionKind::Custom { phi, .. } => phi(a),
            NFunctionKind::Complementary(inner) => complementary(inner, a)?,
        })
    }

    /// `Φ'(t)`; odd in `t`.
    pub fn deriv(&self, t: T) -> Result<T> {
        finite(t)?;
        let a = t.abs();
        let d = match &self.kind {
            NFunctionKind::Power { p, scale } => {
                let v = a.powf(*p - T::one());
                match scale {
                    PowerScale::OverP => v,
                    PowerScale::Unit => *p * v,
                }
            }
            NFunctionKind::LogType { p, q } => log_type_dphi(*p, *q, a),
            NFunctionKind::Kerr => T::lit(4.0) * a.powi(3),
            NFunctionKind::Custom { dphi, .. } => dphi(a),
            NFunctionKind::Complementary(inner) => inverse_derivative(inner, a)?,
        };
        Ok(if t < T::zero() { -d } else { d })
    }

    /// `Φ''(|t|)` where available in closed form.
    pub fn second_deriv(&self, t: T) -> Option<T> {
        let a = t.abs();
        match &self.kind {
            NFunctionKind::Power { p, scale } => {
                let v = (*p - T::one()) * a.powf(*p - T::two());
                Some(match scale {
                    PowerScale::OverP => v,
                    PowerScale::Unit => *p * v,
                })
            }
            NFunctionKind::LogType { p, q } => {
                let ln2 = T::LN_2();
                Some(if a <= T::one() {
                    ln2 * (*p - T::one()) * a.powf(*p - T::two())
                } else {
                    (*q - T::one()) * a.powf(*q - T::two()) * a.ln_1p() + a.powf(*q - T::one()) / (T::one() + a)
                })
            }
            NFunctionKind::Kerr => Some(T::lit(12.0) * a * a),
            NFunctionKind::Custom { .. } => None,
            NFunctionKind::Complementary(inner) => {
                let t_star = inverse_derivative(inner, a).ok()?;
                inner.second_deriv(t_star).map(|s| T::one() / s)
            }
        }
    }

    /// The complementary N-function `Ψ`.
    pub fn complementary(&self) -> Self {
        Self { kind: NFunctionKind::Complementary(Box::new(self.clone())) }
    }
}

fn log_type_dphi<T: Real>(p: T, q: T, a: T) -> T {
    if a <= T::one() {
        T::LN_2() * a.powf(p - T::one())
    } else {
        a.powf(q - T::one()) * a.ln_1p()
    }
}

fn log_type_phi<T: Real>(p: T, q: T, a: T) -> T {
    let head = T::LN_2() * a.min(T::one()).powf(p) / p;
    if a <= T::one() {
        return head;
    }
    head + integrate_geometric(|s: T| s.powf(q - T::one()) * s.ln_1p(), T::one(), a)
}

/// Solves `Φ'(t) = y` for `t >= 0` (`Φ'` strictly increasing) by
/// Newton steps safeguarded with bisection.
pub fn inverse_derivative<T: Real>(nf: &NFunction<T>, y: T) -> Result<T> {
    finite(y)?;
    let y = y.abs();
    if y == T::zero() {
        return Ok(T::zero());
    }
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut it = 0;
    while nf.deriv(hi)? < y {
        lo = hi;
        hi = hi * T::two();
        it += 1;
        if it > 2000 || !hi.is_finite() {
            return Err(Error::Bracket {
                msg: "could not bracket root of Φ'(t) = y".into(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    // shrink the lower end geometrically for tiny targets
    if lo == T::zero() {
        let mut probe = hi;
        for _ in 0..2000 {
            let next = probe * T::half();
            if next == T::zero() || nf.deriv(next)? < y {
                lo = next;
                hi = probe;
                break;
            }
            probe = next;
        }
    }
    let mut t = (lo + hi) * T::half();
    for _ in 0..ROOT_MAX_ITER {
        let g = nf.deriv(t)? - y;
        if g == T::zero() {
            return Ok(t);
        }
        if g > T::zero() {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= T::epsilon() * T::lit(4.0) * hi {
            return Ok((lo + hi) * T::half());
        }
        let newton = nf
            .second_deriv(t)
            .filter(|s| *s > T::zero() && s.is_finite())
            .map(|s| t - g / s);
        t = match newton {
            Some(n) if n > lo && n < hi => n,
            _ => (lo + hi) * T::half(),
        };
    }
    Err(Error::Bracket {
        msg: "root finder for Φ'(t) = y did not converge".into(),
        lo: lo.as_f64(),
        hi: hi.as_f64(),
    })
}

/// `Ψ(s) = sup_{t >= 0} (|s| t - Φ(t)) = |s| t* - Φ(t*)` with `Φ'(t*) = |s|`.
pub fn complementary<T: Real>(nf: &NFunction<T>, s: T) -> Result<T> {
    let a = s.abs();
    let t_star = inverse_derivative(nf, a)?;
    Ok(a * t_star - nf.eval(t_star)?)
}

pub fn eval_phi<T: Real>(nf: &NFunction<T>, t: T) -> Result<T> {
    nf.eval(t)
}

/// `n` log-spaced sample points in `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let s = if n == 1 { T::zero() } else { T::from_usize_lossy(i) / T::from_usize_lossy(n - 1) };
            (a + (b - a) * s).exp()
        })
        .collect()
}

/// The default certification grid: 481 points over `[1e-6, 1e6]`.
pub fn default_condition_grid<T: Real>() -> Vec<T> {
    log_grid(T::lit(CONDITION_T_MIN), T::lit(CONDITION_T_MAX), CONDITION_SAMPLES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta2Report<T> {
    pub holds: bool,
    /// `sup Φ(2t)/Φ(t)` over the samples.
    pub k_const: T,
    /// `sup tΦ'(t)/Φ(t)` over the samples.
    pub kappa: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nabla2Report<T> {
    pub holds: bool,
    /// `inf tΦ'(t)/Φ(t)` over the samples.
    pub kappa_prime: T,
}

fn positive_at<T: Real>(nf: &NFunction<T>, t: T) -> Result<T> {
    let v = nf.eval(t)?;
    if !(v > T::zero()) {
        return Err(Error::InvalidNFunction(format!("Φ({t}) = {v} is not positive")));
    }
    Ok(v)
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|t| !(*t > T::zero())) {
        return Err(Error::Config("condition sample grid must be non-empty and positive".into()));
    }
    Ok(())
}

pub fn check_delta2<T: Real>(nf: &NFunction<T>, grid: &[T]) -> Result<Delta2Report<T>> {
    check_grid(grid)?;
    let mut k_const = T::zero();
    let mut kappa = T::zero();
    for &t in grid {
        let phi = positive_at(nf, t)?;
        k_const = k_const.max(nf.eval(T::two() * t)? / phi);
        kappa = kappa.max(t * nf.deriv(t)? / phi);
    }
    Ok(Delta2Report {
        holds: k_const.is_finite() && kappa.is_finite(),
        k_const,
        kappa,
    })
}

pub fn check_nabla2<T: Real>(nf: &NFunction<T>, grid: &[T]) -> Result<Nabla2Report<T>> {
    check_grid(grid)?;
    let mut kappa_prime = T::infinity();
    for &t in grid {
        let phi = positive_at(nf, t)?;
        kappa_prime = kappa_prime.min(t * nf.deriv(t)? / phi);
    }
    Ok(Nabla2Report {
        holds: kappa_prime > T::one() + T::lit(NABLA2_MARGIN),
        kappa_prime,
    })
}

/// Explicit constants `(C, P)` with `Φ(t) <= C (t² + t^P)` for the built-in kinds.
pub fn growth_sandwich<T: Real>(nf: &NFunction<T>) -> Option<(T, T)> {
    match &nf.kind {
        NFunctionKind::Power { p, scale } => Some((
            match scale {
                PowerScale::OverP => T::one() / *p,
                PowerScale::Unit => T::one(),
            },
            *p,
        )),
        NFunctionKind::Kerr => Some((T::one(), T::lit(4.0))),
        // ln(1+s) <= s gives Φ(t) <= ln2/p + t^{q+1}/q on t > 1 and Φ <= t^p ln2/p below
        NFunctionKind::LogType { q, .. } => Some((T::one(), *q + T::one())),
        _ => None,
    }
}

/// `∫ Φ(m/α) dx` for pointwise magnitudes `m` with cell weight `w`.
fn modular<T: Real>(nf: &NFunction<T>, mags: &[T], w: T, alpha: T) -> Result<T> {
    let mut s = T::zero();
    for &m in mags {
        if m > T::zero() {
            s = s + nf.eval(m / alpha)?;
        }
    }
    Ok(s * w)
}

/// Luxemburg norm of pointwise magnitudes with quadrature weight `w`.
pub fn luxemburg_norm_values<T: Real>(nf: &NFunction<T>, mags: &[T], w: T) -> Result<T> {
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::Domain("non-finite field value".into()));
    }
    let top = mags.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if top == T::zero() {
        return Ok(T::zero());
    }
    let mut lo = top;
    let mut hi = top;
    let mut guard = 0;
    while modular(nf, mags, w, hi)? > T::one() {
        lo = hi;
        hi = hi * T::two();
        guard += 1;
        if guard > 4000 {
            return Err(Error::Bracket { msg: "Luxemburg upper bracket".into(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
    }
    if lo == hi {
        guard = 0;
        while modular(nf, mags, w, lo)? <= T::one() {
            hi = lo;
            lo = lo * T::half();
            guard += 1;
            if guard > 4000 || lo == T::zero() {
                return Err(Error::Bracket { msg: "Luxemburg lower bracket".into(), lo: lo.as_f64(), hi: hi.as_f64() });
            }
        }
    }
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if modular(nf, mags, w, mid)? > T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::lit(1e-14) * hi {
            break;
        }
    }
    Ok((lo + hi) * T::half())
}

/// `|u|_Φ = inf{α > 0 : ∫ Φ(|u|/α) dx <= 1}` on the grid.
pub fn luxemburg_norm<T: Real>(nf: &NFunction<T>, field: &Field6<T>) -> Result<T> {
    let d2 = check_delta2(nf, &default_condition_grid())?;
    if !d2.holds {
        return Err(Error::InvalidNFunction("Δ₂ condition fails on the sample grid".into()));
    }
    luxemburg_norm_values(nf, &field.pointwise_norm(), field.grid().cell_area())
}

/// Which concrete nonlinearity a [`Nonlinearity`] represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityKind<T> {
    /// `F(u) = ω²χ⁽³⁾|u|⁴/8`.
    Kerr { omega: T, chi3: T },
    /// `F(u) = |u|^p / p`.
    Power { p: T },
    /// `F(u) = Φ(|u|)` with the log-type N-function.
    LogType { p: T, q: T },
}

/// A radial nonlinearity `F(u) = G(|u|)` with `f = F'`, together with the
/// constants of its growth conditions.
#[derive(Debug, Clone)]
pub struct Nonlinearity<T: Real> {
    pub kind: NonlinearityKind<T>,
    pub phi: NFunction<T>,
    /// Superquadraticity exponent `γ > 2`.
    pub gamma: T,
    pub c1: T,
    pub c2: T,
}

pub fn make_kerr_nonlinearity<T: Real>(omega: T, chi3: T) -> Result<Nonlinearity<T>> {
    if !(omega > T::zero()) || !(chi3 > T::zero()) || !omega.is_finite() || !chi3.is_finite() {
        return Err(Error::Config(format!("Kerr nonlinearity needs ω > 0 and χ3 > 0, got ω={omega}, χ3={chi3}")));
    }
    let c = omega * omega * chi3;
    Ok(Nonlinearity {
        kind: NonlinearityKind::Kerr { omega, chi3 },
        phi: NFunction::kerr(),
        gamma: T::lit(4.0),
        c1: c / T::lit(8.0),
        c2: c / T::lit(8.0),
    })
}

pub fn make_power_nonlinearity<T: Real>(p: T) -> Result<Nonlinearity<T>> {
    if !(p > T::two()) {
        return Err(Error::Config(format!("power nonlinearity needs p > 2, got {p}")));
    }
    Ok(Nonlinearity {
        kind: NonlinearityKind::Power { p },
        phi: NFunction::power(p, PowerScale::OverP)?,
        gamma: p,
        c1: T::one(),
        c2: T::one(),
    })
}

pub fn make_logtype_nonlinearity<T: Real>(p: T, q: T) -> Result<Nonlinearity<T>> {
    Ok(Nonlinearity {
        kind: NonlinearityKind::LogType { p, q },
        phi: NFunction::log_type(p, q)?,
        gamma: p.min(q),
        c1: T::one(),
        c2: T::one(),
    })
}

#[inline]
fn norm6<T: Real>(u: &[T; 6]) -> T {
    u.iter().fold(T::zero(), |a, &b| a + b * b).sqrt()
}

impl<T: Real> Nonlinearity<T> {
    /// `G(t)` with `F(u) = G(|u|)`.
    pub fn density(&self, t: T) -> T {
        let t = t.abs();
        match self.kind {
            NonlinearityKind::Kerr { omega, chi3 } => omega * omega * chi3 * t.powi(4) / T::lit(8.0),
            NonlinearityKind::Power { p } => t.powf(p) / p,
            NonlinearityKind::LogType { p, q } => log_type_phi(p, q, t),
        }
    }

    /// `G'(t)/t`, so that `f(u) = (G'(|u|)/|u|) u`.
    pub fn ratio(&self, t: T) -> T {
        let t = t.abs();
        match self.kind {
            NonlinearityKind::Kerr { omega, chi3 } => omega * omega * chi3 * t * t * T::half(),
            NonlinearityKind::Power { p } => t.powf(p - T::two()),
            NonlinearityKind::LogType { p, q } => {
                if t <= T::one() {
                    T::LN_2() * t.powf(p - T::two())
                } else {
                    t.powf(q - T::two()) * t.ln_1p()
                }
            }
        }
    }

    /// `G''(t) - G'(t)/t`, divided by `t²` (finite for the built-ins when `t → 0`).
    fn hess_radial(&self, t: T) -> T {
        let t = t.abs();
        match self.kind {
            NonlinearityKind::Kerr { omega, chi3 } => omega * omega * chi3,
            NonlinearityKind::Power { p } => (p - T::two()) * t.powf(p - T::lit(4.0)),
            NonlinearityKind::LogType { p, q } => {
                if t <= T::one() {
                    T::LN_2() * (p - T::two()) * t.powf(p - T::lit(4.0))
                } else {
                    ((q - T::two()) * t.powf(q - T::two()) * t.ln_1p() + t.powf(q - T::one()) / (T::one() + t))
                        / (t * t)
                }
            }
        }
    }

    pub fn big_f(&self, u: &[T; 6]) -> T {
        self.density(norm6(u))
    }

    pub fn f(&self, u: &[T; 6]) -> [T; 6] {
        let r = self.ratio(norm6(u));
        std::array::from_fn(|c| r * u[c])
    }

    /// `f'(u) d = (G'/t) d + (G'' - G'/t) <u,d> u / t²`.
    pub fn hessian_apply(&self, u: &[T; 6], d: &[T; 6]) -> [T; 6] {
        let t = norm6(u);
        let r = self.ratio(t);
        if t == T::zero() {
            return std::array::from_fn(|c| r * d[c]);
        }
        let ud = u.iter().zip(d).fold(T::zero(), |a, (&x, &y)| a + x * y);
        let s = self.hess_radial(t) * ud;
        std::array::from_fn(|c| r * d[c] + s * u[c])
    }

    /// Largest eigenvalue of `f'(u)`: `max(G'/t, G'')`.
    pub fn hessian_bound(&self, t: T) -> T {
        let r = self.ratio(t);
        r.max(r + self.hess_radial(t) * t * t)
    }

    /// Effective susceptibility `χ(½|u|²) = <f(u), u> / (ω² |u|²)`.
    pub fn chi_effective(&self, t: T, omega: T) -> T {
        self.ratio(t) / (omega * omega)
    }
}

/// Outcome of sampling the structural conditions (F0)–(F3) and radiality.
#[derive(Debug, Clone, PartialEq)]
pub struct FConditionReport {
    pub f0: bool,
    pub f1: bool,
    pub f2: bool,
    pub f3: bool,
    pub radial: bool,
    pub samples: usize,
    /// `min (<f,u>/γ - F)` over samples; nonnegative when (F3) holds.
    pub ar_gap_min: f64,
}

impl FConditionReport {
    pub fn all(&self) -> bool {
        self.f0 && self.f1 && self.f2 && self.f3 && self.radial
    }
}

fn random_vector<T: Real>(rng: &mut ChaCha8Rng) -> [T; 6] {
    let mag = 10f64.powf(rng.random_range(-4.0..4.0));
    let mut v: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for x in v.iter_mut() {
        *x *= mag / n;
    }
    std::array::from_fn(|c| T::lit(v[c]))
}

/// Samples (F0)–(F3) and radiality on `samples` random vectors.
pub fn check_f_conditions<T: Real>(nl: &Nonlinearity<T>, samples: usize, seed: u64) -> Result<FConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rel = T::lit(1e-12);
    let zero = [T::zero(); 6];
    let mut rep = FConditionReport {
        f0: nl.big_f(&zero) == T::zero(),
        f1: true,
        f2: true,
        f3: true,
        radial: true,
        samples,
        ar_gap_min: f64::INFINITY,
    };
    for _ in 0..samples {
        let a = random_vector::<T>(&mut rng);
        let b = random_vector::<T>(&mut rng);
        let fa = nl.big_f(&a);
        let fb = nl.big_f(&b);
        let mid: [T; 6] = std::array::from_fn(|c| (a[c] + b[c]) * T::half());
        if fa < T::zero() || nl.big_f(&mid) > (fa + fb) * T::half() * (T::one() + rel) {
            rep.f0 = false;
        }
        let t = norm6(&a);
        let fv = nl.f(&a);
        let fnorm = norm6(&fv);
        if fnorm > nl.c1 * (T::one() + nl.phi.deriv(t)?) * (T::one() + rel) {
            rep.f2 = false;
        }
        let fu = fv.iter().zip(&a).fold(T::zero(), |s, (&x, &y)| s + x * y);
        let gap = fu / nl.gamma - fa;
        rep.ar_gap_min = rep.ar_gap_min.min(gap.as_f64() / fa.as_f64().max(f64::MIN_POSITIVE));
        if gap < -rel * fa || fa < nl.c2 * nl.phi.eval(t)? * (T::one() - rel) {
            rep.f3 = false;
        }
        // radial: F at a rotated copy with the same norm
        let mut rot = a;
        rot.rotate_left(1);
        if (nl.big_f(&rot) - fa).abs() > rel * fa.max(T::min_positive_value()) {
            rep.radial = false;
        }
    }
    // (F1): |f(u)|/|u| decreases to zero along a ray
    let dir = [T::one(), T::zero(), T::zero(), T::zero(), T::zero(), T::zero()];
    let ratio_at = |s: T| {
        let u: [T; 6] = std::array::from_fn(|c| dir[c] * s);
        norm6(&nl.f(&u)) / s
    };
    let ratios: Vec<T> = (1..=8).map(|e| ratio_at(T::lit(10f64.powi(-e)))).collect();
    rep.f1 = ratios.windows(2).all(|w| w[1] < w[0]);
    Ok(rep)
}
