//! Pointwise bounds: decay rates, scaled derivative bounds and time Hölder
//! quotients. Suprema are lattice maxima, hence lower bounds on the true
//! suprema.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pressure::refinement;
use crate::sample::LocalLattice;
use crate::solver::Trajectory;

use super::cylinder::ParabolicCylinder;
use super::local::{check_order, local_max_derivative, max_derivative_magnitude, sample_velocity, snapshots_in, state_at};
use super::record::Series;

/// `t ↦ t^{(l+1)/2} max_x |∇^l u(x, t)|` at every snapshot.
pub fn decay_diagnostic(traj: &Trajectory, order: usize) -> Result<Series> {
    check_order(order)?;
    let values: Vec<f64> = traj
        .times()
        .par_iter()
        .zip(traj.snapshots())
        .map(|(&t, u)| {
            if t <= 0.0 {
                0.0
            } else {
                t.powf(0.5 * (order as f64 + 1.0)) * max_derivative_magnitude(u, order)
            }
        })
        .collect();
    Series::from_parts(format!("decay_l{order}"), traj.times().to_vec(), values)
}

fn half_ball(traj: &Trajectory, cyl: &ParabolicCylinder) -> Result<LocalLattice> {
    let g = *traj.grid();
    cyl.check_fits(&g)?;
    let r = 0.5 * cyl.radius;
    LocalLattice::ball(&g, cyl.center_x, r, refinement(&g, r, 6))
}

/// `sup_{Q_{z0,r/2}} |∇^k u| · r^{1+k}`.
///
/// Snapshots in `(t0 - r²/4, t0]` are examined; when none falls there the
/// state interpolated at `t0` is used.
pub fn derivative_bound_check(traj: &Trajectory, cyl: &ParabolicCylinder, order: usize) -> Result<f64> {
    check_order(order)?;
    let half = cyl.half();
    let ball = half_ball(traj, cyl)?;
    let idx = snapshots_in(traj, half.center_t - half.radius * half.radius, half.center_t);
    let sup = if idx.is_empty() {
        let (u, _) = state_at(traj, None, cyl.center_t)?;
        local_max_derivative(&ball, &u, order)
    } else {
        idx.par_iter()
            .map(|&i| local_max_derivative(&ball, &traj.snapshots()[i], order))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
    };
    Ok(sup * cyl.radius.powi(1 + order as i32))
}

/// `max |u(x,t) - u(x,t')| / |t - t'|^{1/3}` over lattice points of `B(x0, r/2)`
/// and snapshot pairs in `(t0 - r²/4, t0]`.
pub fn time_holder_check(traj: &Trajectory, cyl: &ParabolicCylinder) -> Result<f64> {
    let half = cyl.half();
    let idx = snapshots_in(traj, half.center_t - half.radius * half.radius, half.center_t);
    if idx.len() < 4 {
        return Err(Error::TooFewSnapshots {
            needed: 4,
            found: idx.len(),
        });
    }
    let ball = half_ball(traj, cyl)?;
    let samples: Vec<Vec<Vec<f64>>> = idx
        .par_iter()
        .map(|&i| sample_velocity(&ball, &traj.snapshots()[i]))
        .collect();
    let times: Vec<f64> = idx.iter().map(|&i| traj.times()[i]).collect();
    let mut worst: f64 = 0.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let dt = (times[b] - times[a]).abs().cbrt();
            for k in 0..ball.len() {
                let d2: f64 = (0..3).map(|c| (samples[b][c][k] - samples[a][c][k]).powi(2)).sum();
                worst = worst.max(d2.sqrt() / dt);
            }
        }
    }
    Ok(worst)
}
