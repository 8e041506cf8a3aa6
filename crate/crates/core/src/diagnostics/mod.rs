//! Regularity diagnostics on stored trajectories: the CKN smallness quantity
//! on parabolic cylinders, local energy balances, local energy norms, decay
//! rates and pointwise derivative bounds.
//!
//! Space integrals are lattice sums over ball or cube points with membership
//! by point position; time integrals use the trapezoid rule over snapshots.

mod bounds;
mod ckn;
mod cylinder;
mod energy;
mod local;
mod record;
mod sweep;

pub use bounds::{decay_diagnostic, derivative_bound_check, time_holder_check};
pub use ckn::ckn_quantity;
pub use cylinder::{classify_point, Classification, ParabolicCylinder, TildeCylinder, DEFAULT_EPS0};
pub use energy::{
    energy_scaling_probe, init_energy_residual, local_energy_norm, local_energy_residual, local_energy_terms,
    local_l2_continuity, time_mollify, BumpTestFunction, EnergyBalance, EnergyScalingProbe, PhiValues, ProbeSample, TestFunction,
};
pub use record::{DiagnosticsRecord, Series};
pub use sweep::{cylinder_sweep, summarize, write_sweep_csv, SweepRow, SweepSpec, SweepSummary, SWEEP_CSV_HEADER};

pub(crate) use local::{sample_gradient, sample_velocity, trapezoid};
