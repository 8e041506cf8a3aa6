//! Sweeps of the smallness test and local energy norm over many cylinders.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::ScalarSpectralField;
use crate::solver::Trajectory;

use super::ckn::ckn_quantity;
use super::cylinder::{classify_point, Classification, ParabolicCylinder, TildeCylinder};
use super::energy::local_energy_norm;

/// Centers, cylinder times and radii to sweep; every combination is visited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub centers: Vec<[f64; 3]>,
    pub center_times: Vec<f64>,
    pub radii: Vec<f64>,
    pub eps0: f64,
}

impl SweepSpec {
    /// `per_axis³` centers on a uniform lattice offset by half a spacing.
    pub fn lattice_centers(box_length: f64, per_axis: usize) -> Vec<[f64; 3]> {
        let h = box_length / per_axis as f64;
        let mut out = Vec::with_capacity(per_axis.pow(3));
        for i in 0..per_axis {
            for j in 0..per_axis {
                for k in 0..per_axis {
                    out.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h, (k as f64 + 0.5) * h]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub center_x: [f64; 3],
    pub center_t: f64,
    pub radius: f64,
    pub ckn_value: f64,
    pub classification: Classification,
    pub energy_norm_sq: f64,
    pub energy_over_r: f64,
}

/// Aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub eps0: f64,
    pub cylinders: usize,
    pub small: usize,
    pub not_small: usize,
    pub max_ckn: f64,
    pub lemarie_ratio_max: f64,
}

/// Rows ordered by center, then cylinder time, then radius.
pub fn cylinder_sweep(traj: &Trajectory, pressures: &[ScalarSpectralField], spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if !(spec.eps0 > 0.0) {
        return Err(invalid(format!("eps0 must be positive, got {}", spec.eps0)));
    }
    let mut jobs = Vec::new();
    for c in &spec.centers {
        for &t in &spec.center_times {
            for &r in &spec.radii {
                jobs.push((*c, t, r));
            }
        }
    }
    jobs.par_iter()
        .map(|&(c, t, r)| {
            let cyl = ParabolicCylinder::new(c, t, r)?;
            let value = ckn_quantity(traj, pressures, &cyl)?;
            let e = local_energy_norm(traj, &TildeCylinder::new(c, r)?)?;
            Ok(SweepRow {
                center_x: c,
                center_t: t,
                radius: r,
                ckn_value: value,
                classification: classify_point(value, spec.eps0),
                energy_norm_sq: e,
                energy_over_r: e / r,
            })
        })
        .collect()
}

pub fn summarize(rows: &[SweepRow], eps0: f64) -> SweepSummary {
    let small = rows.iter().filter(|r| r.classification == Classification::Small).count();
    SweepSummary {
        eps0,
        cylinders: rows.len(),
        small,
        not_small: rows.len() - small,
        max_ckn: rows.iter().map(|r| r.ckn_value).fold(0.0, f64::max),
        lemarie_ratio_max: rows.iter().map(|r| r.energy_over_r).fold(0.0, f64::max),
    }
}

pub const SWEEP_CSV_HEADER: &str =
    "center_x,center_y,center_z,center_t,r,ckn_value,classification,energy_norm_sq,energy_over_r";

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e}",
            r.center_x[0],
            r.center_x[1],
            r.center_x[2],
            r.center_t,
            r.radius,
            r.ckn_value,
            r.classification,
            r.energy_norm_sq,
            r.energy_over_r
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralVelocity;
    use crate::grid::Grid;
    use crate::solver::StepPolicy;

    #[test]
    fn zero_trajectory_sweep_is_all_small() {
        let g = Grid::periodic(8).unwrap();
        let mut tr = Trajectory::new(g, StepPolicy::Prescribed);
        for i in 0..=32 {
            tr.push(i as f64 * 0.0025, SpectralVelocity::zeros(g)).unwrap();
        }
        let ps = vec![ScalarSpectralField::zeros(g); tr.len()];
        let spec = SweepSpec {
            centers: SweepSpec::lattice_centers(g.box_length(), 3),
            center_times: vec![0.08],
            radii: vec![0.2, 0.15],
            eps0: 0.05,
        };
        let rows = cylinder_sweep(&tr, &ps, &spec).unwrap();
        assert_eq!(rows.len(), 54);
        let s = summarize(&rows, 0.05);
        assert_eq!(s.small, 54);
        let mut out = Vec::new();
        write_sweep_csv(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 55);
        assert!(text.lines().nth(1).unwrap().ends_with(",small,0e0,0e0"));
    }
}
