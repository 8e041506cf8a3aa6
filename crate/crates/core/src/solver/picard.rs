use crate::error::{invalid, Error, Result};
use crate::field::{SpectralField, SpectralVelocity};
use crate::ops::{grad_sq, projected_convection};

use super::duhamel::{apply_weights, weights, DEFAULT_QUAD_POINTS};
use super::report::{Caps, NormSample, Outcome, SolveReport};
use super::trajectory::{StepPolicy, Trajectory};
use super::{heat_propagate, x_norm_of};

/// Settings for [`picard_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Number of uniform intervals of the shared time lattice.
    pub intervals: usize,
    pub quad_points: usize,
    /// Iterates whose X-norm exceeds this multiple of `‖U‖_X` count as diverging.
    pub divergence_factor: f64,
    /// Consecutive growing differences (after iteration 2) that count as diverging.
    pub patience: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            intervals: 64,
            quad_points: DEFAULT_QUAD_POINTS,
            divergence_factor: 10.0,
            patience: 3,
        }
    }
}

/// Fixed-point iteration `u⁽ⁿ⁺¹⁾ = U + B(u⁽ⁿ⁾, u⁽ⁿ⁾)` with `U = S(t)u₀`.
pub fn picard_solve(
    u0: &SpectralVelocity,
    horizon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, SolveReport)> {
    picard_solve_with(u0, horizon, tol, max_iter, &PicardOptions::default())
}

pub fn picard_solve_with(
    u0: &SpectralVelocity,
    horizon: f64,
    tol: f64,
    max_iter: usize,
    opts: &PicardOptions,
) -> Result<(Trajectory, SolveReport)> {
    u0.require_divergence_free(1e-10)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid(format!("Picard horizon must be positive, got {horizon}")));
    }
    if opts.intervals == 0 || max_iter == 0 || !(tol > 0.0) {
        return Err(invalid("Picard needs intervals >= 1, max_iter >= 1 and tol > 0"));
    }
    let g = *u0.grid();
    let m = opts.intervals;
    let times: Vec<f64> = (0..=m).map(|j| horizon * j as f64 / m as f64).collect();
    let shells: Vec<u32> = g.shells().into_iter().map(|q| q as u32).collect();
    let max_shell = 3 * (g.n() / 2) * (g.n() / 2);
    let k0sq = g.k0() * g.k0();
    let table: Vec<Vec<Vec<f64>>> = times
        .iter()
        .map(|&t| weights(&times, t, k0sq, max_shell, opts.quad_points))
        .collect::<Result<_>>()?;

    let free: Vec<SpectralVelocity> = times
        .iter()
        .map(|&t| heat_propagate(u0, t))
        .collect::<Result<_>>()?;
    let ux = x_norm_of(&times, &free);
    let mut current = free.clone();
    let mut diffs = Vec::new();
    let mut outcome = None;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        let forcing: Vec<SpectralVelocity> = current.iter().map(|u| projected_convection(u).scaled(-1.0)).collect();
        let refs: Vec<&SpectralVelocity> = forcing.iter().collect();
        let next: Vec<SpectralVelocity> = (0..=m)
            .map(|n| {
                let b = apply_weights(&g, &shells, &table[n], &refs[..=n]);
                b.add(&free[n]).expect("same grid")
            })
            .collect();
        if next.iter().any(|u| !u.is_finite()) {
            outcome = Some(Outcome::BlowupProxy);
            break;
        }
        let delta: Vec<SpectralVelocity> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.sub(b).expect("same grid"))
            .collect();
        let d = x_norm_of(&times, &delta);
        diffs.push(d);
        let norm = x_norm_of(&times, &next);
        current = next;
        if d == 0.0 || d <= tol * ux {
            outcome = Some(Outcome::Completed);
            break;
        }
        if !d.is_finite() || norm > opts.divergence_factor * ux {
            outcome = Some(Outcome::BlowupProxy);
            break;
        }
        if it > 2 && diffs.len() > opts.patience {
            let growing = diffs[diffs.len() - opts.patience - 1..]
                .windows(2)
                .all(|w| w[1] > w[0]);
            if growing {
                outcome = Some(Outcome::BlowupProxy);
                break;
            }
        }
    }
    let Some(outcome) = outcome else {
        return Err(Error::MaxIterations {
            iterations,
            last_difference: diffs.last().copied().unwrap_or(f64::NAN),
        });
    };

    let mut traj = Trajectory::new(
        g,
        StepPolicy::Picard {
            intervals: m,
            quad_points: opts.quad_points,
        },
    );
    let mut samples: Vec<NormSample> = Vec::with_capacity(m + 1);
    let mut diss = 0.0;
    let mut prev_rate = 0.0;
    for (j, (t, u)) in times.iter().zip(current).enumerate() {
        if !u.is_finite() {
            break;
        }
        let rate = 2.0 * grad_sq(&u);
        if j > 0 {
            diss += 0.5 * (t - times[j - 1]) * (rate + prev_rate);
        }
        prev_rate = rate;
        samples.push(NormSample::measure(*t, &u, samples.last(), diss, 0.0));
        traj.push_unchecked(*t, u);
    }
    let report = SolveReport {
        outcome,
        horizon,
        t_end: horizon,
        samples,
        picard_iterations: Some(iterations),
        picard_differences: diffs,
        initial_courant: None,
        caps: Caps::default(),
        note: (outcome == Outcome::BlowupProxy)
            .then(|| "Picard iterates diverged on this interval length".to_string()),
    };
    Ok((traj, report))
}
