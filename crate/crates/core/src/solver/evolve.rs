use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{SpectralField, SpectralVelocity};
use crate::ops::{grad_sq, inner, leray_project, projected_convection};

use super::report::{Caps, NormSample, Outcome, SolveReport};
use super::trajectory::{StepPolicy, Trajectory};

pub const DEFAULT_CFL_LIMIT: f64 = 0.5;

/// Settings for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Requested step; the effective step is `horizon / ceil(horizon / dt)`.
    pub dt: f64,
    /// Store a snapshot every `stride` steps (0 keeps only the endpoints).
    pub stride: usize,
    pub caps: Caps,
    pub cfl_limit: f64,
    /// Stop at the first cap event instead of running to the horizon.
    pub stop_on_cap: bool,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            stride: 1,
            caps: Caps::default(),
            cfl_limit: DEFAULT_CFL_LIMIT,
            stop_on_cap: true,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }
}

/// Integrate `û_t = -|k|² û - P∇·(u⊗u)^` with integrating-factor RK4.
pub fn evolve(u0: &SpectralVelocity, horizon: f64, dt: f64) -> Result<(Trajectory, SolveReport)> {
    evolve_with(u0, horizon, &EvolveOptions::new(dt))
}

pub fn evolve_with(
    u0: &SpectralVelocity,
    horizon: f64,
    opts: &EvolveOptions,
) -> Result<(Trajectory, SolveReport)> {
    u0.require_divergence_free(1e-10)?;
    integrate_if_rk4(u0, horizon, opts, |_, u| projected_convection(u).scaled(-1.0))
}

fn combine<const K: usize>(
    fields: [&SpectralVelocity; K],
    shells: &[u32],
    e_half: &[f64],
    e_full: &[f64],
    f: impl Fn([Complex64; K], f64, f64) -> Complex64,
) -> SpectralVelocity {
    let g = *fields[0].grid();
    let comps = std::array::from_fn(|c| {
        let src: [&[Complex64]; K] = std::array::from_fn(|k| fields[k].comp(c));
        (0..g.len())
            .map(|idx| {
                let q = shells[idx] as usize;
                f(std::array::from_fn(|k| src[k][idx]), e_half[q], e_full[q])
            })
            .collect()
    });
    SpectralVelocity::from_raw(g, comps)
}

/// Lawson RK4 for `û_t = -|k|² û + N(t, u)`.
///
/// Alongside the state the scheme integrates `2‖∇u‖²` and `2⟨u, N⟩` with the
/// same stage weights, so the energy budget closes to the order of the
/// method rather than to the order of a quadrature over stored samples.
pub(crate) fn integrate_if_rk4(
    u0: &SpectralVelocity,
    horizon: f64,
    opts: &EvolveOptions,
    mut nonlinear: impl FnMut(f64, &SpectralVelocity) -> SpectralVelocity,
) -> Result<(Trajectory, SolveReport)> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(invalid(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {}", opts.dt)));
    }
    let g = *u0.grid();
    let courant = u0.to_physical().max_magnitude() * opts.dt / g.dx();
    if !(courant < opts.cfl_limit) {
        return Err(Error::CflViolation {
            courant,
            limit: opts.cfl_limit,
        });
    }
    let steps = if horizon == 0.0 {
        0
    } else {
        ((horizon / opts.dt - 1e-9).ceil() as usize).max(1)
    };
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };

    let shells: Vec<u32> = g.shells().into_iter().map(|q| q as u32).collect();
    let max_shell = 3 * (g.n() / 2) * (g.n() / 2);
    let k0sq = g.k0() * g.k0();
    let e_half: Vec<f64> = (0..=max_shell).map(|q| (-k0sq * q as f64 * 0.5 * h).exp()).collect();
    let e_full: Vec<f64> = e_half.iter().map(|e| e * e).collect();

    let mut traj = Trajectory::new(g, StepPolicy::IfRk4 { dt: h, stride: opts.stride });
    let mut u = u0.clone();
    let first = NormSample::measure(0.0, &u, None, 0.0, 0.0);
    let mut samples = vec![first];
    traj.push_unchecked(0.0, u.clone());
    let (mut diss, mut work) = (0.0, 0.0);
    let mut outcome = Outcome::Completed;
    let mut t_end = horizon;
    let rates = |v: &SpectralVelocity, nv: &SpectralVelocity| -> (f64, f64) {
        (2.0 * grad_sq(v), 2.0 * inner(v, nv).expect("same grid"))
    };

    for step in 0..steps {
        let t = step as f64 * h;
        let a = nonlinear(t, &u);
        let u2 = combine([&u, &a], &shells, &e_half, &e_full, |[x, y], e, _| (x + y * (0.5 * h)) * e);
        let b = nonlinear(t + 0.5 * h, &u2);
        let u3 = combine([&u, &b], &shells, &e_half, &e_full, |[x, y], e, _| x * e + y * (0.5 * h));
        let c = nonlinear(t + 0.5 * h, &u3);
        let u4 = combine([&u, &c], &shells, &e_half, &e_full, |[x, y], e, f| x * f + y * (h * e));
        let d = nonlinear(t + h, &u4);

        let (r1, w1) = rates(&u, &a);
        let (r2, w2) = rates(&u2, &b);
        let (r3, w3) = rates(&u3, &c);
        let (r4, w4) = rates(&u4, &d);
        diss += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
        work += h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4);

        let next = combine([&u, &a, &b, &c, &d], &shells, &e_half, &e_full, |[x, a, b, c, d], e, f| {
            x * f + (a * f + (b + c) * (2.0 * e) + d) * (h / 6.0)
        });
        u = leray_project(&next).canonicalized();

        let tn = if step + 1 == steps { horizon } else { (step + 1) as f64 * h };
        let s = NormSample::measure(tn, &u, samples.last(), diss, work);
        samples.push(s);
        let event = opts.caps.event(&s, first.hhalf);
        let finite = u.is_finite();
        let stop = !finite || (opts.stop_on_cap && event.is_some());
        if finite && (stop || step + 1 == steps || (opts.stride > 0 && (step + 1) % opts.stride == 0)) {
            traj.push_unchecked(tn, u.clone());
        }
        if stop {
            outcome = if finite { event.unwrap() } else { Outcome::Underresolved };
            t_end = tn;
            break;
        }
    }
    if outcome == Outcome::Completed && !opts.stop_on_cap {
        outcome = samples
            .iter()
            .find_map(|s| opts.caps.event(s, first.hhalf))
            .unwrap_or(Outcome::Completed);
    }

    let report = SolveReport {
        outcome,
        horizon,
        t_end,
        samples,
        picard_iterations: None,
        picard_differences: Vec::new(),
        initial_courant: Some(courant),
        caps: opts.caps,
        note: (outcome == Outcome::BlowupProxy)
            .then(|| "Galerkin blow-up proxy: a norm cap was exceeded while resolved".to_string()),
    };
    Ok((traj, report))
}
