//! Pseudo-spectral solver for the incompressible Navier–Stokes equations on
//! the periodic box `[0, L)³` with unit viscosity, and the measurements that
//! go with critical-norm well-posedness and partial regularity: `Ḣ^{1/2}`
//! and `L⁴Ḣ¹` norms, Picard iteration for the mild formulation, pressure
//! recovery, CKN smallness on parabolic cylinders, local energy balances,
//! and experiment harnesses built on them.
//!
//! Conventions: spectral coefficients are Fourier-series amplitudes,
//! `u(x) = Σ_k û(k) e^{ik·x}`, so `‖u‖²_{L²} = L³ Σ |û(k)|²`. Fields are kept
//! Hermitian with zero mean and zeroed Nyquist planes; quadratic products
//! are dealiased with the 2/3 rule.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub(crate) mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod pressure;
pub mod sample;
pub mod snapshot;
pub mod solver;

pub use error::{Error, Result};
pub use field::{PhysicalField, ScalarSpectralField, SpectralField, SpectralVelocity};
pub use grid::Grid;
pub use solver::{Caps, Outcome, SolveReport, Trajectory};
