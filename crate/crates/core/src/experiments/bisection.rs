//! Amplitude bisection for the Galerkin threshold proxy: the largest
//! amplitude of a data family whose run still completes.
//!
//! The threshold belongs to the finite system and its caps; it carries no
//! claim about the continuum equations.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::solver::{evolve_with, EvolveOptions, Outcome, SolveReport};

use super::initial::{make_initial_data, InitialDataSpec};

pub const THRESHOLD_LABEL: &str = "Galerkin threshold proxy";

/// Produces a solve report for a given amplitude.
pub trait RunOracle {
    fn run(&self, amplitude: f64) -> Result<SolveReport>;
}

/// Realizes the data family at each amplitude and evolves it.
#[derive(Debug, Clone)]
pub struct EvolveOracle {
    pub spec: InitialDataSpec,
    pub grid: Grid,
    pub horizon: f64,
    pub options: EvolveOptions,
}

impl RunOracle for EvolveOracle {
    fn run(&self, amplitude: f64) -> Result<SolveReport> {
        let u0 = make_initial_data(&self.spec.with_amplitude(amplitude), &self.grid)?;
        let opts = EvolveOptions {
            stride: 0,
            ..self.options
        };
        Ok(evolve_with(&u0, self.horizon, &opts)?.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionRun {
    pub amplitude: f64,
    pub outcome: Outcome,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionResult {
    pub label: String,
    /// Largest amplitude known to complete.
    pub lower: f64,
    /// Smallest amplitude known not to complete.
    pub upper: f64,
    pub iterations: usize,
    /// `(lower, upper)` after each midpoint run.
    pub brackets: Vec<(f64, f64)>,
    /// Every run in execution order, starting with the two bracket ends.
    pub runs: Vec<BisectionRun>,
    /// Time at which the upper run tripped a cap.
    pub upper_event_time: f64,
    /// `λ = √t*`: the map `u ↦ λu(λx, λ²t)` moves the upper run's cap event
    /// to `t = 1`.
    pub unit_time_lambda: f64,
}

/// `⌈log₂((hi − lo)/(tol·lo))⌉`, the number of midpoint runs.
pub fn expected_iterations(lo: f64, hi: f64, tol: f64) -> usize {
    let r = (hi - lo) / (tol * lo);
    if r <= 1.0 {
        0
    } else {
        r.log2().ceil() as usize
    }
}

/// Bisect until `upper − lower < tol · a_lo` (initial lower end).
pub fn amplitude_bisection(oracle: &dyn RunOracle, bracket: (f64, f64), tol: f64) -> Result<BisectionResult> {
    let (a_lo, a_hi) = bracket;
    if !(a_lo > 0.0 && a_hi > a_lo && a_hi.is_finite()) {
        return Err(Error::InvalidBracket(format!("need 0 < a_lo < a_hi, got ({a_lo}, {a_hi})")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let lo_rep = oracle.run(a_lo)?;
    let hi_rep = oracle.run(a_hi)?;
    let (lo_out, hi_out) = (lo_rep.outcome, hi_rep.outcome);
    if lo_out == Outcome::Underresolved && hi_out == Outcome::Underresolved {
        return Err(Error::AllUnderresolved);
    }
    if lo_out != Outcome::Completed || hi_out == Outcome::Completed {
        return Err(Error::InvalidBracket(format!(
            "run at a_lo={a_lo} is {lo_out} (t_end {}), run at a_hi={a_hi} is {hi_out} (t_end {}); \
             need completed below and not completed above",
            lo_rep.t_end, hi_rep.t_end
        )));
    }
    let mut runs = vec![
        BisectionRun {
            amplitude: a_lo,
            outcome: lo_out,
            report: lo_rep,
        },
        BisectionRun {
            amplitude: a_hi,
            outcome: hi_out,
            report: hi_rep,
        },
    ];
    let (mut lo, mut hi) = (a_lo, a_hi);
    let mut upper_event_time = runs[1].report.t_end;
    let mut brackets = Vec::new();
    let width = tol * a_lo;
    while hi - lo >= width {
        let mid = 0.5 * (lo + hi);
        let rep = oracle.run(mid)?;
        let out = rep.outcome;
        if out == Outcome::Completed {
            lo = mid;
        } else {
            hi = mid;
            upper_event_time = rep.t_end;
        }
        brackets.push((lo, hi));
        runs.push(BisectionRun {
            amplitude: mid,
            outcome: out,
            report: rep,
        });
    }
    Ok(BisectionResult {
        label: THRESHOLD_LABEL.to_string(),
        lower: lo,
        upper: hi,
        iterations: brackets.len(),
        brackets,
        runs,
        upper_event_time,
        unit_time_lambda: upper_event_time.sqrt(),
    })
}
