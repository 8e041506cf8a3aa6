//! Time integration of the periodic Navier–Stokes equations
//! `u_t + ∇·(u⊗u) + ∇p = Δu` (unit viscosity), by Duhamel/Picard iteration
//! and by integrating-factor Runge–Kutta stepping.

mod duhamel;
mod evolve;
mod picard;
mod report;
mod trajectory;

pub use duhamel::{duhamel_bilinear, duhamel_bilinear_with, duhamel_integral, duhamel_integral_with, DEFAULT_QUAD_POINTS};
pub use evolve::{evolve, evolve_with, EvolveOptions, DEFAULT_CFL_LIMIT};
pub(crate) use evolve::integrate_if_rk4;
pub use picard::{picard_solve, picard_solve_with, PicardOptions};
pub use report::{detect_blowup_proxy, Caps, NormSample, Outcome, SolveReport};
pub use trajectory::{StepPolicy, Trajectory};

use crate::error::{Error, Result};
use crate::field::{SpectralField, SpectralVelocity};
use crate::ops::hs_norm_sq;

/// Heat semigroup `S(t)`: multiplies every mode by `exp(-|k|² t)`.
pub fn heat_propagate<F: SpectralField>(u: &F, t: f64) -> Result<F> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(u.clone());
    }
    Ok(crate::ops::heat_multiply(u, t))
}

/// `(∫₀ᵀ ‖u(t)‖⁴_{Ḣ¹} dt)^{1/4}` by the trapezoid rule on snapshot times.
///
/// When `T` falls between snapshots the last partial interval uses the
/// linear interpolant of the integrand.
pub fn x_norm(traj: &Trajectory, t_end: f64) -> Result<f64> {
    let times = traj.times();
    let (start, end) = (times[0], traj.horizon());
    if !(t_end >= start && t_end <= end + 1e-12 * end.abs().max(1.0)) {
        return Err(Error::TimeOutOfRange { t: t_end, start, end });
    }
    let f: Vec<f64> = traj.snapshots().iter().map(|u| hs_norm_sq(u, 1.0).powi(2)).collect();
    Ok(trapezoid_upto(times, &f, t_end).max(0.0).powf(0.25))
}

/// X-norm of a sequence of fields on a shared time lattice.
pub(crate) fn x_norm_of(times: &[f64], fields: &[SpectralVelocity]) -> f64 {
    let f: Vec<f64> = fields.iter().map(|u| hs_norm_sq(u, 1.0).powi(2)).collect();
    trapezoid_upto(times, &f, *times.last().unwrap()).max(0.0).powf(0.25)
}

/// `∫_{t0}^{t_end} f` for samples `f(times[i])`, linear between samples.
pub(crate) fn trapezoid_upto(times: &[f64], f: &[f64], t_end: f64) -> f64 {
    let mut s = 0.0;
    for i in 1..times.len() {
        let (a, b) = (times[i - 1], times[i]);
        if a >= t_end {
            break;
        }
        if b <= t_end {
            s += 0.5 * (b - a) * (f[i - 1] + f[i]);
        } else {
            let th = (t_end - a) / (b - a);
            let fe = f[i - 1] + th * (f[i] - f[i - 1]);
            s += 0.5 * (t_end - a) * (f[i - 1] + fe);
            break;
        }
    }
    s
}
