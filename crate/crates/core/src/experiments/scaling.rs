//! Scaling covariance: `u_λ(x, t) = λ u(λx, λ²t)` solves the same equations.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{SpectralField, SpectralVelocity};
use crate::ops::hs_norm;
use crate::solver::{evolve_with, EvolveOptions, Outcome, SolveReport};

use super::rescale::rescale_data;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lam: f64,
    pub horizon: f64,
    pub coarse_n: usize,
    pub fine_n: usize,
    pub coarse: SolveReport,
    pub fine: SolveReport,
    /// `‖rescale(u(T)) − u_λ(T/λ²)‖_{Ḣ^{1/2}} / ‖u_λ(T/λ²)‖_{Ḣ^{1/2}}`; absent
    /// when either run did not complete.
    pub discrepancy: Option<f64>,
    pub note: Option<String>,
}

/// Evolve `u₀` over `[0, T]` with step `dt`, and `λu₀(λx)` over `[0, T/λ²]`
/// with step `dt/λ²` on a grid with `λn` modes, then compare at the ends.
pub fn scaling_covariance_experiment(
    u0: &SpectralVelocity,
    lam: f64,
    horizon: f64,
    opts: &EvolveOptions,
) -> Result<ScalingReport> {
    let u0_fine = rescale_data(u0, lam)?;
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let only_ends = EvolveOptions { stride: 0, ..*opts };
    let (coarse_traj, coarse) = evolve_with(u0, horizon, &only_ends)?;
    let fine_opts = EvolveOptions {
        dt: opts.dt / (lam * lam),
        ..only_ends
    };
    let (fine_traj, fine) = evolve_with(&u0_fine, horizon / (lam * lam), &fine_opts)?;
    let (discrepancy, note) = if fine.outcome != Outcome::Completed {
        (None, Some(format!("fine run {}; not compared", fine.outcome)))
    } else if coarse.outcome != Outcome::Completed {
        (None, Some(format!("coarse run {}; not compared", coarse.outcome)))
    } else {
        let mapped = rescale_data(coarse_traj.last().expect("endpoint stored"), lam)?;
        let target = fine_traj.last().expect("endpoint stored");
        let scale = hs_norm(target, 0.5);
        let d = hs_norm(&mapped.sub(target)?, 0.5);
        (Some(if scale == 0.0 { d } else { d / scale }), None)
    };
    Ok(ScalingReport {
        lam,
        horizon,
        coarse_n: u0.grid().n(),
        fine_n: u0_fine.grid().n(),
        coarse,
        fine,
        discrepancy,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{make_initial_data, InitialDataSpec};
    use crate::grid::Grid;

    #[test]
    fn unit_factor_gives_zero_discrepancy() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).unwrap();
        let r = scaling_covariance_experiment(&u, 1.0, 0.05, &EvolveOptions::new(0.01)).unwrap();
        assert_eq!(r.discrepancy, Some(0.0));
    }

    #[test]
    fn doubled_taylor_green_is_covariant() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).unwrap();
        let r = scaling_covariance_experiment(&u, 2.0, 0.1, &EvolveOptions::new(0.01)).unwrap();
        assert_eq!(r.fine_n, 32);
        assert!(r.discrepancy.unwrap() < 1e-10, "{r:?}");
        assert!(scaling_covariance_experiment(&u, 1.5, 0.1, &EvolveOptions::new(0.01)).is_err());
    }

    #[test]
    fn underresolved_fine_run_is_flagged() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::random(1.0, 2, -0.5), &g).unwrap();
        let caps = crate::solver::Caps {
            tail_fraction: 0.0,
            ..Default::default()
        };
        let opts = EvolveOptions::new(0.002).with_caps(caps);
        let r = scaling_covariance_experiment(&u, 2.0, 0.01, &opts).unwrap();
        assert!(r.discrepancy.is_none());
        assert!(r.note.unwrap().contains("underresolved"));
    }
}
