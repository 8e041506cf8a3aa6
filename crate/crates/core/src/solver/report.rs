use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::field::SpectralVelocity;
use crate::ops::{hs_norm_sq, tail_fraction};

use super::trajectory::Trajectory;

/// Classification of a run.
///
/// `BlowupProxy` is a heuristic label for a finite Galerkin system: a norm
/// cap was exceeded while the spectrum stayed resolved. It is never a claim
/// of a singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowupProxy,
    Underresolved,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::BlowupProxy => "blowup_proxy",
            Outcome::Underresolved => "underresolved",
        }
    }

    /// Process exit code: 0 completed, 2 blow-up proxy, 3 under-resolved.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Completed => 0,
            Outcome::BlowupProxy => 2,
            Outcome::Underresolved => 3,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds for the blow-up proxy and the resolution gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Allowed growth of `‖u‖_{Ḣ^{1/2}}` over its initial value.
    pub hhalf_factor: f64,
    /// Largest tolerated energy fraction in the top third of retained modes.
    pub tail_fraction: f64,
    /// Cap on the cumulative X-norm (infinite disables it).
    pub x_norm: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            hhalf_factor: 20.0,
            tail_fraction: 1e-3,
            x_norm: f64::INFINITY,
        }
    }
}

impl Caps {
    /// Classify a single sample against the caps; `None` means no event.
    pub(crate) fn event(&self, s: &NormSample, hhalf0: f64) -> Option<Outcome> {
        let finite = [s.l2, s.hhalf, s.h1, s.tail_fraction, s.x_norm_cum]
            .iter()
            .all(|v| v.is_finite());
        if !finite || s.tail_fraction > self.tail_fraction {
            return Some(Outcome::Underresolved);
        }
        if s.hhalf > self.hhalf_factor * hhalf0 || s.x_norm_cum > self.x_norm {
            return Some(Outcome::BlowupProxy);
        }
        None
    }
}

/// Norms of one stored state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub time: f64,
    /// `‖u‖_{L²}`.
    pub l2: f64,
    pub hhalf: f64,
    pub h1: f64,
    /// `(∫₀ᵗ ‖u‖⁴_{Ḣ¹})^{1/4}` by the trapezoid rule over samples.
    pub x_norm_cum: f64,
    pub tail_fraction: f64,
    /// `2∫₀ᵗ ‖∇u‖² ds`.
    pub dissipation: f64,
    /// `2∫₀ᵗ ⟨u, N(u)⟩ ds` for the nonlinearity `N` (zero for the
    /// Navier–Stokes flux up to rounding).
    pub work: f64,
}

impl NormSample {
    pub(crate) fn measure(
        t: f64,
        u: &SpectralVelocity,
        prev: Option<&NormSample>,
        dissipation: f64,
        work: f64,
    ) -> Self {
        let h1sq = hs_norm_sq(u, 1.0);
        let x4 = match prev {
            None => 0.0,
            Some(p) => p.x_norm_cum.powi(4) + 0.5 * (t - p.time) * (p.h1.powi(4) + h1sq * h1sq),
        };
        Self {
            time: t,
            l2: hs_norm_sq(u, 0.0).sqrt(),
            hhalf: hs_norm_sq(u, 0.5).sqrt(),
            h1: h1sq.sqrt(),
            x_norm_cum: x4.powf(0.25),
            tail_fraction: tail_fraction(u),
            dissipation,
            work,
        }
    }

    /// `E(t) + 2∫‖∇u‖² - 2∫⟨u,N⟩`, which equals `E(0)` for exact dynamics.
    pub fn energy_balance(&self) -> f64 {
        self.l2 * self.l2 + self.dissipation - self.work
    }
}

/// Summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub horizon: f64,
    pub t_end: f64,
    pub samples: Vec<NormSample>,
    pub picard_iterations: Option<usize>,
    /// X-norm distances between successive Picard iterates.
    pub picard_differences: Vec<f64>,
    /// Largest `max|u| dt / dx` seen at the start of a stepped run.
    pub initial_courant: Option<f64>,
    pub caps: Caps,
    pub note: Option<String>,
}

impl SolveReport {
    pub fn x_norm_history(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.time, s.x_norm_cum)).collect()
    }

    /// Largest `|E(t) + 2∫‖∇u‖² - E(0)| / E(0)` over the samples.
    pub fn energy_budget_defect(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let e0 = first.l2 * first.l2;
        if e0 == 0.0 {
            return 0.0;
        }
        self.samples
            .iter()
            .map(|s| (s.l2 * s.l2 + s.dissipation - e0).abs() / e0)
            .fold(0.0, f64::max)
    }

    /// Successive-difference ratios of the Picard iteration.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.picard_differences
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }

    /// Norm series as CSV: `time,l2,hhalf,h1,x_norm_cum,tail_fraction`.
    pub fn write_norms_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time,l2,hhalf,h1,x_norm_cum,tail_fraction")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                s.time, s.l2, s.hhalf, s.h1, s.x_norm_cum, s.tail_fraction
            )?;
        }
        Ok(())
    }
}

/// Scan a run in time order and report the first cap event.
///
/// The tail-fraction gate is checked before the norm caps, so a state that
/// trips both counts as under-resolved. Samples in the report are used when
/// present; otherwise norms are measured on the trajectory snapshots.
pub fn detect_blowup_proxy(traj: &Trajectory, report: &SolveReport, caps: &Caps) -> Outcome {
    let measured;
    let samples: &[NormSample] = if report.samples.is_empty() {
        let mut v: Vec<NormSample> = Vec::with_capacity(traj.len());
        for (t, u) in traj.times().iter().zip(traj.snapshots()) {
            let s = NormSample::measure(*t, u, v.last(), 0.0, 0.0);
            v.push(s);
        }
        measured = v;
        &measured
    } else {
        &report.samples
    };
    let Some(first) = samples.first() else {
        return Outcome::Completed;
    };
    for s in samples {
        if let Some(o) = caps.event(s, first.hhalf) {
            return o;
        }
    }
    Outcome::Completed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, hhalf: f64, tail: f64) -> NormSample {
        NormSample {
            time: t,
            l2: 1.0,
            hhalf,
            h1: 1.0,
            x_norm_cum: t,
            tail_fraction: tail,
            dissipation: 0.0,
            work: 0.0,
        }
    }

    fn report(samples: Vec<NormSample>) -> SolveReport {
        SolveReport {
            outcome: Outcome::Completed,
            horizon: 1.0,
            t_end: 1.0,
            samples,
            picard_iterations: None,
            picard_differences: vec![],
            initial_courant: None,
            caps: Caps::default(),
            note: None,
        }
    }

    #[test]
    fn classification_order() {
        let g = crate::grid::Grid::periodic(8).unwrap();
        let tr = Trajectory::new(g, super::super::StepPolicy::Prescribed);
        let caps = Caps::default();
        let decaying = report(vec![sample(0.0, 1.0, 0.0), sample(0.5, 0.8, 0.0), sample(1.0, 0.6, 0.0)]);
        assert_eq!(detect_blowup_proxy(&tr, &decaying, &caps), Outcome::Completed);

        let inflated = report(vec![sample(0.0, 1.0, 0.0), sample(0.5, 25.0, 1e-4)]);
        assert_eq!(detect_blowup_proxy(&tr, &inflated, &caps), Outcome::BlowupProxy);

        let tail_first = report(vec![
            sample(0.0, 1.0, 0.0),
            sample(0.5, 2.0, 2e-3),
            sample(1.0, 30.0, 2e-3),
        ]);
        assert_eq!(detect_blowup_proxy(&tr, &tail_first, &caps), Outcome::Underresolved);

        let tie = report(vec![sample(0.0, 1.0, 0.0), sample(0.5, 30.0, 2e-3)]);
        assert_eq!(detect_blowup_proxy(&tr, &tie, &caps), Outcome::Underresolved);

        let nan = report(vec![sample(0.0, 1.0, 0.0), sample(0.5, f64::NAN, 0.0)]);
        assert_eq!(detect_blowup_proxy(&tr, &nan, &caps), Outcome::Underresolved);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = report(vec![sample(0.0, 1.0, 0.0), sample(0.5, 0.5, 0.0)]);
        let mut buf = Vec::new();
        r.write_norms_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,l2,hhalf,h1,x_norm_cum,tail_fraction");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "5e-1,1e0,5e-1,1e0,5e-1,0e0");
    }
}
