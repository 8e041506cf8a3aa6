//! Picard contraction under amplitude doubling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{heat_propagate, picard_solve_with, x_norm_of, Outcome, PicardOptions};

use super::initial::{make_initial_data, InitialDataSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub amplitude: f64,
    /// `‖U‖_X` of the free evolution `U = S(t)u₀`.
    pub u_x_norm: f64,
    /// `None` when the iteration hit `max_iter` undecided.
    pub outcome: Option<Outcome>,
    pub iterations: usize,
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Largest successive-difference ratio after iteration 2.
    pub max_ratio: f64,
    /// Converged with ratios below one and differences decreasing after
    /// iteration 2.
    pub contracting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionSweep {
    pub rows: Vec<ContractionRow>,
    /// Largest amplitude that contracted.
    pub last_contracting: Option<f64>,
    /// First amplitude that did not.
    pub failure_amplitude: Option<f64>,
    /// Mean of `ratio / ‖U‖_X` over contracting rows: an empirical estimate
    /// of the bilinear constant's effect on the iteration.
    pub ratio_per_unit_norm: Option<f64>,
}

fn row(spec: &InitialDataSpec, grid: &Grid, amplitude: f64, horizon: f64, tol: f64, max_iter: usize, opts: &PicardOptions) -> Result<ContractionRow> {
    let u0 = make_initial_data(&spec.with_amplitude(amplitude), grid)?;
    let m = opts.intervals;
    let times: Vec<f64> = (0..=m).map(|j| horizon * j as f64 / m as f64).collect();
    let free = times.iter().map(|&t| heat_propagate(&u0, t)).collect::<Result<Vec<_>>>()?;
    let u_x_norm = x_norm_of(&times, &free);
    let (outcome, iterations, differences) = match picard_solve_with(&u0, horizon, tol, max_iter, opts) {
        Ok((_, rep)) => (Some(rep.outcome), rep.picard_iterations.unwrap_or(0), rep.picard_differences),
        Err(Error::MaxIterations { iterations, .. }) => (None, iterations, Vec::new()),
        Err(e) => return Err(e),
    };
    let ratios: Vec<f64> = differences
        .windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect();
    let late = if ratios.len() > 1 { &ratios[1..] } else { &ratios[..] };
    let max_ratio = late.iter().copied().fold(0.0, f64::max);
    let contracting = outcome == Some(Outcome::Completed) && late.iter().all(|r| *r < 1.0);
    Ok(ContractionRow {
        amplitude,
        u_x_norm,
        outcome,
        iterations,
        differences,
        ratios,
        max_ratio,
        contracting,
    })
}

/// Run Picard at `start, 2·start, 4·start, …` until contraction fails or
/// `max_doublings` is reached.
#[allow(clippy::too_many_arguments)]
pub fn picard_contraction_sweep(
    spec: &InitialDataSpec,
    grid: &Grid,
    horizon: f64,
    start_amplitude: f64,
    max_doublings: usize,
    tol: f64,
    max_iter: usize,
    opts: &PicardOptions,
) -> Result<ContractionSweep> {
    let mut rows = Vec::new();
    let mut a = start_amplitude;
    for _ in 0..=max_doublings {
        let r = row(spec, grid, a, horizon, tol, max_iter, opts)?;
        let stop = !r.contracting;
        rows.push(r);
        if stop {
            break;
        }
        a *= 2.0;
    }
    let good: Vec<&ContractionRow> = rows.iter().filter(|r| r.contracting).collect();
    let per: Vec<f64> = good
        .iter()
        .filter(|r| r.u_x_norm > 0.0 && r.ratios.len() > 1)
        .map(|r| r.max_ratio / r.u_x_norm)
        .collect();
    Ok(ContractionSweep {
        last_contracting: good.last().map(|r| r.amplitude),
        failure_amplitude: rows.iter().find(|r| !r.contracting).map(|r| r.amplitude),
        ratio_per_unit_norm: (!per.is_empty()).then(|| per.iter().sum::<f64>() / per.len() as f64),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_taylor_green_contracts_and_large_fails() {
        let g = Grid::periodic(8).unwrap();
        let opts = PicardOptions {
            intervals: 8,
            quad_points: 16,
            ..Default::default()
        };
        let s = picard_contraction_sweep(&InitialDataSpec::taylor_green(1.0), &g, 0.5, 0.5, 8, 1e-9, 60, &opts).unwrap();
        let first = &s.rows[0];
        assert!(first.contracting, "{first:?}");
        assert!(first.max_ratio < 1.0);
        assert!(first.differences.windows(2).skip(1).all(|w| w[1] < w[0]));
        let fail = s.failure_amplitude.expect("doubling eventually breaks contraction");
        assert_eq!(s.last_contracting, Some(fail / 2.0));
        // reproducible bracket
        let again = picard_contraction_sweep(&InitialDataSpec::taylor_green(1.0), &g, 0.5, 0.5, 8, 1e-9, 60, &opts).unwrap();
        assert_eq!(again, s);
        // ratios grow with the data
        assert!(s.rows.windows(2).all(|w| w[1].u_x_norm > w[0].u_x_norm));
    }
}
