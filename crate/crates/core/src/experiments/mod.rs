//! Numerical experiments built on the solver: initial-data families,
//! symmetry maps, Calderón splitting, weak-limit stability and amplitude
//! bisection.

mod bisection;
mod calderon;
mod contraction;
mod decay;
mod initial;
mod rescale;
mod scaling;
mod venergy;
mod weak;

pub use bisection::{
    amplitude_bisection, expected_iterations, BisectionResult, BisectionRun, EvolveOracle, RunOracle, THRESHOLD_LABEL,
};
pub use calderon::{calderon_split, CalderonSplit, RadialCutoff};
pub use contraction::{picard_contraction_sweep, ContractionRow, ContractionSweep};
pub use decay::{decay_ensemble, DecayEnsemble, DecayMember};
pub use initial::{make_initial_data, Family, InitialDataSpec};
pub use rescale::{rescale_data, resample, translate_data};
pub use scaling::{scaling_covariance_experiment, ScalingReport};
pub use venergy::{v_energy_check, VEnergyReport};
pub use weak::{
    strictly_decreasing_tail, weak_convergence_experiment, Perturbation, ProbeRegion, WeakConvergenceReport,
    WeakConvergenceRow,
};
