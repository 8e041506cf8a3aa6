//! Stability of solutions under weakly null perturbations of the data.
//!
//! On a torus translations cannot escape to infinity, so weakly null
//! sequences are emulated by high-frequency modulations and by moving a
//! profile away from the probe region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{sample_gradient, sample_velocity, trapezoid};
use crate::error::{invalid, Error, Result};
use crate::field::{SpectralField, SpectralVelocity, ZERO};
use crate::grid::Grid;
use crate::ops::{hs_norm, leray_project};
use crate::pressure::refinement;
use crate::sample::LocalLattice;
use crate::solver::{evolve_with, EvolveOptions, Outcome, Trajectory};

use super::rescale::translate_data;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `w_k = A e_y cos(m_k x)` with `m_k = m₁ 2^{k-1}`.
    Modulation { amplitude: f64, base_wavenumber: i64 },
    /// `w_k = w(· − x_k)` for a fixed profile and a list of shifts.
    Translation {
        #[serde(skip)]
        profile: Option<SpectralVelocity>,
        shifts: Vec<[f64; 3]>,
    },
}

/// Ball on which differences are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRegion {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceRow {
    pub k: usize,
    /// Norm used to audit weak nullity: `Ḣ^{-1}` for modulations, `L²` on
    /// the probe region for translations.
    pub audit_norm: f64,
    pub outcome: Outcome,
    /// `‖uᵏ − u‖_{L³(B × [T/2, T])}`.
    pub l3_diff: f64,
    /// `max |uᵏ − u|` over lattice points of `B` and snapshots in `[T/2, T]`.
    pub sup_diff: f64,
    /// Same for `|∇(uᵏ − u)|`.
    pub grad_sup_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceReport {
    pub horizon: f64,
    pub probe: ProbeRegion,
    /// `max |u|` of the limit run over the probe region and window.
    pub field_scale: f64,
    pub rows: Vec<WeakConvergenceRow>,
    pub l3_decreasing_last3: bool,
    pub sup_decreasing_last3: bool,
}

/// True when the last three entries are strictly decreasing.
pub fn strictly_decreasing_tail(v: &[f64], count: usize) -> bool {
    v.len() >= count && v[v.len() - count..].windows(2).all(|w| w[1] < w[0])
}

impl Perturbation {
    fn terms(&self, g: &Grid, k_max: usize, probe: &ProbeRegion) -> Result<Vec<(SpectralVelocity, f64)>> {
        let mut out = Vec::with_capacity(k_max);
        match self {
            Perturbation::Modulation {
                amplitude,
                base_wavenumber,
            } => {
                for k in 1..=k_max {
                    let m = base_wavenumber.checked_mul(1 << (k - 1)).filter(|m| *m > 0);
                    let Some(m) = m.filter(|m| *m <= g.cutoff()) else {
                        return Err(Error::NotWeaklyNull(format!(
                            "term {k} leaves the retained band (cutoff {})",
                            g.cutoff()
                        )));
                    };
                    let c = num_complex::Complex64::new(0.5 * amplitude, 0.0);
                    let w = SpectralVelocity::from_modes(*g, &[([m, 0, 0], [ZERO, c, ZERO])])?;
                    let audit = hs_norm(&w, -1.0);
                    out.push((w, audit));
                }
            }
            Perturbation::Translation { profile, shifts } => {
                let profile = profile.as_ref().ok_or_else(|| invalid("translation needs a profile"))?;
                g.check_same(profile.grid())?;
                if shifts.len() < k_max {
                    return Err(invalid(format!("{} shifts given for {k_max} terms", shifts.len())));
                }
                let ball = LocalLattice::ball(g, probe.center, probe.radius, refinement(g, probe.radius, 6))?;
                for s in &shifts[..k_max] {
                    let w = leray_project(&translate_data(profile, *s));
                    let v = sample_velocity(&ball, &w);
                    let l2: f64 = (0..ball.len()).map(|i| v[0][i].powi(2) + v[1][i].powi(2) + v[2][i].powi(2)).sum();
                    out.push((w, (l2 * ball.cell_volume()).sqrt()));
                }
            }
        }
        let audits: Vec<f64> = out.iter().map(|t| t.1).collect();
        if audits.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::NotWeaklyNull(format!("audit norms do not decrease: {audits:?}")));
        }
        Ok(out)
    }
}

/// Snapshots with `t ≥ T/2` (the probe window).
fn window(traj: &Trajectory, horizon: f64) -> (Vec<f64>, Vec<SpectralVelocity>) {
    traj.times()
        .iter()
        .zip(traj.snapshots())
        .filter(|(t, _)| **t >= 0.5 * horizon * (1.0 - 1e-12))
        .map(|(t, u)| (*t, u.clone()))
        .unzip()
}

/// Solve from `u₀` and from `u₀ + w_k`, `k = 1..k_max`, and measure the
/// differences on the probe region over `[T/2, T]`. Runs use the same step
/// and stride so their snapshot times coincide.
///
/// Modulations approach the dealiasing cutoff on purpose, so runs are not
/// stopped at cap events; each row still reports the gate outcome.
pub fn weak_convergence_experiment(
    u0: &SpectralVelocity,
    perturbation: &Perturbation,
    k_max: usize,
    horizon: f64,
    opts: &EvolveOptions,
    probe: &ProbeRegion,
) -> Result<WeakConvergenceReport> {
    if k_max == 0 {
        return Err(invalid("k_max must be at least 1"));
    }
    let opts = &EvolveOptions {
        stop_on_cap: false,
        ..*opts
    };
    let g = *u0.grid();
    let ball = LocalLattice::ball(&g, probe.center, probe.radius, refinement(&g, probe.radius, 6))?;
    let terms = perturbation.terms(&g, k_max, probe)?;
    let (base_traj, _) = evolve_with(u0, horizon, opts)?;
    let (times, base) = window(&base_traj, horizon);
    drop(base_traj);
    if times.len() < 2 {
        return Err(Error::TooFewSnapshots {
            needed: 2,
            found: times.len(),
        });
    }
    let base_u: Vec<Vec<Vec<f64>>> = base.par_iter().map(|u| sample_velocity(&ball, u)).collect();
    let base_g: Vec<Vec<Vec<f64>>> = base.par_iter().map(|u| sample_gradient(&ball, u)).collect();
    drop(base);
    let field_scale = base_u
        .iter()
        .flat_map(|s| (0..ball.len()).map(move |i| (s[0][i].powi(2) + s[1][i].powi(2) + s[2][i].powi(2)).sqrt()))
        .fold(0.0, f64::max);

    let mut rows = Vec::with_capacity(k_max);
    for (k, (w, audit)) in terms.into_iter().enumerate() {
        let uk0 = u0.add(&w)?;
        let (traj, report) = evolve_with(&uk0, horizon, opts)?;
        let (tk, snaps) = window(&traj, horizon);
        drop(traj);
        if tk != times {
            return Err(Error::TimeLatticeMismatch);
        }
        let per: Vec<(f64, f64, f64)> = snaps
            .par_iter()
            .enumerate()
            .map(|(j, u)| {
                let uv = sample_velocity(&ball, u);
                let gv = sample_gradient(&ball, u);
                let (mut cube, mut sup, mut gsup) = (0.0, 0.0f64, 0.0f64);
                for i in 0..ball.len() {
                    let d: f64 = (0..3).map(|c| (uv[c][i] - base_u[j][c][i]).powi(2)).sum::<f64>().sqrt();
                    let dg: f64 = (0..9).map(|c| (gv[c][i] - base_g[j][c][i]).powi(2)).sum::<f64>().sqrt();
                    cube += d * d * d;
                    sup = sup.max(d);
                    gsup = gsup.max(dg);
                }
                (cube * ball.cell_volume(), sup, gsup)
            })
            .collect();
        let cubes: Vec<f64> = per.iter().map(|p| p.0).collect();
        rows.push(WeakConvergenceRow {
            k: k + 1,
            audit_norm: audit,
            outcome: report.outcome,
            l3_diff: trapezoid(&times, &cubes).cbrt(),
            sup_diff: per.iter().map(|p| p.1).fold(0.0, f64::max),
            grad_sup_diff: per.iter().map(|p| p.2).fold(0.0, f64::max),
        });
    }
    let l3: Vec<f64> = rows.iter().map(|r| r.l3_diff).collect();
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_diff).collect();
    let tail = 3.min(rows.len());
    Ok(WeakConvergenceReport {
        horizon,
        probe: *probe,
        field_scale,
        l3_decreasing_last3: strictly_decreasing_tail(&l3, tail),
        sup_decreasing_last3: strictly_decreasing_tail(&sup, tail),
        rows,
    })
}
