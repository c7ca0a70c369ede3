//! Travelling electromagnetic waves `E = U cos(kz+ωt) + Ũ sin(kz+ωt)` in
//! nonlinear, cylindrically symmetric media.
//!
//! The crate discretizes the curl-curl problem `Lu - V u = f(u)` on a
//! periodic planar grid and provides the pieces needed to compute and
//! certify its solutions: mimetic difference operators, N-functions and
//! Orlicz norms, the SO(2) symmetry machinery, a shooting solver for the
//! TE radial ODE, a reduced variational solver for TM modes, and the
//! synthesis of physical fields and energies.

pub mod error;
pub mod fft;
pub mod fields;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod ode;
pub mod operators;
pub mod orlicz;
pub mod quad;
pub mod scalar;
pub mod symmetry;
pub mod te_ode;
pub mod variational;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GridF64 = grid::Grid2D<f64>;
pub type Field6F64 = grid::Field6<f64>;
pub type ScalarPairF64 = grid::ScalarPair<f64>;
pub type RadialProfileF64 = grid::RadialProfile<f64>;
pub type NFunctionF64 = orlicz::NFunction<f64>;
pub type NonlinearityF64 = orlicz::Nonlinearity<f64>;
pub type NodalSolutionF64 = te_ode::NodalSolution<f64>;
pub type TmProblemF64 = variational::TmProblem<f64>;
pub type CriticalPointF64 = variational::CriticalPoint<f64>;
pub type WaveContextF64 = fields::WaveContext<f64>;
pub type VectorField3F64 = fields::VectorField3<f64>;
