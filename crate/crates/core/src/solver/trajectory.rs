use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{SpectralField, SpectralVelocity};
use crate::grid::Grid;
use crate::snapshot;

/// How the snapshots of a trajectory were produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum StepPolicy {
    /// Integrating-factor RK4 with fixed step, snapshots every `stride` steps.
    IfRk4 { dt: f64, stride: usize },
    /// Picard iteration on a uniform lattice.
    Picard { intervals: usize, quad_points: usize },
    /// Snapshots supplied by the caller.
    Prescribed,
}

/// Relative divergence accepted for stored snapshots.
const DIV_TOL: f64 = 1e-10;

/// Time-ordered velocity snapshots starting at `t = 0`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    snapshots: Vec<SpectralVelocity>,
    policy: StepPolicy,
}

impl Trajectory {
    pub fn new(grid: Grid, policy: StepPolicy) -> Self {
        Self {
            grid,
            times: Vec::new(),
            snapshots: Vec::new(),
            policy,
        }
    }

    pub fn from_parts(
        grid: Grid,
        times: Vec<f64>,
        snapshots: Vec<SpectralVelocity>,
        policy: StepPolicy,
    ) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(invalid(format!(
                "{} times for {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        let mut traj = Self::new(grid, policy);
        for (t, u) in times.into_iter().zip(snapshots) {
            traj.push(t, u)?;
        }
        Ok(traj)
    }

    /// Append a snapshot; times must start at 0 and increase strictly.
    pub fn push(&mut self, t: f64, u: SpectralVelocity) -> Result<()> {
        self.grid.check_same(u.grid())?;
        match self.times.last() {
            None if t != 0.0 => return Err(invalid(format!("trajectory must start at t = 0, got {t}"))),
            Some(&last) if !(t > last) => {
                return Err(invalid(format!("snapshot time {t} does not follow {last}")))
            }
            _ => {}
        }
        if !t.is_finite() {
            return Err(invalid("non-finite snapshot time"));
        }
        let r = u.divergence_ratio();
        if r > DIV_TOL {
            return Err(Error::NotDivergenceFree(r));
        }
        self.times.push(t);
        self.snapshots.push(u);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, t: f64, u: SpectralVelocity) {
        self.times.push(t);
        self.snapshots.push(u);
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn policy(&self) -> StepPolicy {
        self.policy
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralVelocity] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Last stored time.
    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn last(&self) -> Option<&SpectralVelocity> {
        self.snapshots.last()
    }

    /// Largest gap between consecutive snapshots.
    pub fn max_spacing(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Interval index `i` and weight `θ` with `t = (1-θ) t_i + θ t_{i+1}`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if self.is_empty() {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end: 0.0 });
        }
        let (start, end) = (self.times[0], self.horizon());
        let slack = 1e-12 * end.abs().max(1.0);
        if t < start - slack || t > end + slack {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        if self.len() == 1 {
            return Ok((0, 0.0));
        }
        let i = self.times.partition_point(|&s| s <= t).clamp(1, self.len() - 1) - 1;
        let th = ((t - self.times[i]) / (self.times[i + 1] - self.times[i])).clamp(0.0, 1.0);
        Ok((i, th))
    }

    /// Piecewise-linear interpolation in time.
    pub fn interpolate(&self, t: f64) -> Result<SpectralVelocity> {
        let (i, th) = self.locate(t)?;
        if th == 0.0 {
            return Ok(self.snapshots[i].clone());
        }
        if th == 1.0 {
            return Ok(self.snapshots[i + 1].clone());
        }
        let mut out = self.snapshots[i].scaled(1.0 - th);
        out.axpy(th, &self.snapshots[i + 1])?;
        Ok(out)
    }

    /// Apply `f(t, u)` to every snapshot.
    pub fn map(&self, mut f: impl FnMut(f64, &SpectralVelocity) -> SpectralVelocity) -> Result<Self> {
        let mut out = Self::new(self.grid, StepPolicy::Prescribed);
        for (t, u) in self.times.iter().zip(&self.snapshots) {
            out.push(*t, f(*t, u))?;
        }
        Ok(out)
    }

    /// Write one `snap_NNNNN.nssf` file per snapshot into `dir`.
    pub fn save_snapshots(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(self.len());
        for (k, (t, u)) in self.times.iter().zip(&self.snapshots).enumerate() {
            let p = dir.join(format!("snap_{k:05}.nssf"));
            snapshot::save(&p, *t, u)?;
            paths.push(p);
        }
        Ok(paths)
    }

    /// Read every `*.nssf` velocity snapshot in `dir`, ordered by file name.
    pub fn load_snapshots(dir: impl AsRef<Path>) -> Result<Self> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir.as_ref())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "nssf"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(invalid(format!("no snapshot files in {}", dir.as_ref().display())));
        }
        let mut traj: Option<Self> = None;
        for p in paths {
            let (t, u) = snapshot::load(&p)
                .and_then(|s| s.into_velocity())
                .map_err(|e| match e {
                    Error::Snapshot { offset, message } => Error::Snapshot {
                        offset,
                        message: format!("{}: {message}", p.display()),
                    },
                    e => e,
                })?;
            let tr = traj.get_or_insert_with(|| Self::new(*u.grid(), StepPolicy::Prescribed));
            tr.push(t, u)
                .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        }
        Ok(traj.expect("at least one snapshot"))
    }
}
