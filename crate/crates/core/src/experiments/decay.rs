//! Small-data decay: `sup_t t^{1/2} ‖u(t)‖_∞` for the nonlinear run against
//! the heat flow of the same data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::decay_diagnostic;
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::solver::{evolve_with, heat_propagate, EvolveOptions, Outcome, StepPolicy, Trajectory};

use super::initial::{make_initial_data, Family, InitialDataSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayMember {
    pub seed: u64,
    pub outcome: Outcome,
    pub nse_peak: f64,
    pub linear_peak: f64,
    /// `|nse_peak − linear_peak| / linear_peak`.
    pub relative_gap: f64,
    pub nse_peak_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEnsemble {
    pub amplitude: f64,
    pub horizon: f64,
    pub members: Vec<DecayMember>,
    pub max_relative_gap: f64,
}

fn peak(times: &[f64], values: &[f64]) -> (f64, f64) {
    times
        .iter()
        .zip(values)
        .fold((0.0, 0.0), |b, (&t, &v)| if v > b.1 { (t, v) } else { b })
}

/// One run per seed of the random family at `spec.amplitude`.
pub fn decay_ensemble(
    spec: &InitialDataSpec,
    seeds: &[u64],
    grid: &Grid,
    horizon: f64,
    opts: &EvolveOptions,
) -> Result<DecayEnsemble> {
    if spec.family != Family::RandomDivfree {
        return Err(invalid("decay ensemble needs the random_divfree family"));
    }
    if seeds.is_empty() {
        return Err(invalid("decay ensemble needs at least one seed"));
    }
    let members = seeds
        .par_iter()
        .map(|&seed| {
            let u0 = make_initial_data(&InitialDataSpec { seed, ..spec.clone() }, grid)?;
            let (traj, rep) = evolve_with(&u0, horizon, opts)?;
            let nse = decay_diagnostic(&traj, 0)?;
            let mut lin = Trajectory::new(*grid, StepPolicy::Prescribed);
            for &t in traj.times() {
                lin.push(t, heat_propagate(&u0, t)?)?;
            }
            let heat = decay_diagnostic(&lin, 0)?;
            let (t_n, p_n) = peak(&nse.times, &nse.values);
            let (_, p_l) = peak(&heat.times, &heat.values);
            Ok(DecayMember {
                seed,
                outcome: rep.outcome,
                nse_peak: p_n,
                linear_peak: p_l,
                relative_gap: if p_l == 0.0 { 0.0 } else { (p_n - p_l).abs() / p_l },
                nse_peak_time: t_n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayEnsemble {
        amplitude: spec.amplitude,
        horizon,
        max_relative_gap: members.iter().map(|m| m.relative_gap).fold(0.0, f64::max),
        members,
    })
}
