//! `run`, `diagnose` and `experiment`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use hhalf_core::diagnostics::{cylinder_sweep, summarize, write_sweep_csv, SweepSpec, DEFAULT_EPS0};
use hhalf_core::experiments::{
    amplitude_bisection, calderon_split, decay_ensemble, make_initial_data, scaling_covariance_experiment,
    weak_convergence_experiment, EvolveOracle, Family, InitialDataSpec, Perturbation, ProbeRegion,
};
use hhalf_core::ops::hs_norm;
use hhalf_core::pressure::pressure_series;
use hhalf_core::snapshot;
use hhalf_core::solver::{evolve_with, picard_solve_with};
use hhalf_core::Trajectory;

use crate::config::Config;
use crate::settings::{self, Method};
use crate::CliError;

pub const EXPERIMENT_KINDS: &[&str] = &["scaling", "weak_convergence", "bisection", "calderon", "decay"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Scaling,
    WeakConvergence,
    Bisection,
    Calderon,
    Decay,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "scaling" => Self::Scaling,
            "weak_convergence" => Self::WeakConvergence,
            "bisection" => Self::Bisection,
            "calderon" => Self::Calderon,
            "decay" => Self::Decay,
            _ => {
                return Err(CliError::new(format!(
                    "unknown experiment kind `{s}`\nusage: hhalf experiment <{}> <config>",
                    EXPERIMENT_KINDS.join("|")
                )))
            }
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Scaling => "scaling",
            Self::WeakConvergence => "weak_convergence",
            Self::Bisection => "bisection",
            Self::Calderon => "calderon",
            Self::Decay => "decay",
        }
    }
}

fn with_workers<T>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::new(format!("cannot create {}: {e}", path.display())))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

fn file_names(paths: &[PathBuf], root: &Path) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.strip_prefix(root).unwrap_or(p).display().to_string())
        .collect()
}

fn manifest(command: &str, cfg: &Config, extra: Value) -> Value {
    let mut m = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.resolved(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut m, extra) {
        m.extend(e);
    }
    m
}

/// Solve from a configuration; returns the outcome's exit code.
pub fn cmd_run(config_path: &Path) -> Result<i32, CliError> {
    let mut cfg = Config::load(config_path)?;
    let grid = settings::grid(&mut cfg)?;
    let data = settings::data(&mut cfg)?;
    let solver = settings::solver(&mut cfg, 1)?;
    let out = settings::output_dir(&mut cfg, "run_out");
    let workers = settings::workers(&mut cfg)?;
    cfg.check_unused()?;

    let (traj, report) = with_workers(workers, || -> Result<_, CliError> {
        let u0 = make_initial_data(&data, &grid)?;
        Ok(match solver.method {
            Method::Evolve => evolve_with(&u0, solver.horizon, &solver.evolve)?,
            Method::Picard => picard_solve_with(&u0, solver.horizon, solver.tol, solver.max_iter, &solver.picard)?,
        })
    })??;

    fs::create_dir_all(&out)?;
    let snaps = traj.save_snapshots(out.join("snapshots"))?;
    let mut files = vec![out.join("norms.csv")];
    let mut w = create(&files[0])?;
    report.write_norms_csv(&mut w)?;
    w.flush()?;
    if solver.method == Method::Picard {
        let rows: Vec<String> = report
            .picard_differences
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{},{d:e}", i + 1))
            .collect();
        let p = out.join("picard.csv");
        write_csv(&p, "iteration,x_difference", &rows)?;
        files.push(p);
    }
    files.extend(snaps);
    let m = manifest(
        "run",
        &cfg,
        json!({
            "outcome": report.outcome,
            "exit_code": report.outcome.exit_code(),
            "t_end": report.t_end,
            "snapshots": traj.len(),
            "initial_courant": report.initial_courant,
            "picard_iterations": report.picard_iterations,
            "energy_budget_defect": report.energy_budget_defect(),
            "note": report.note,
            "files": file_names(&files, &out),
        }),
    );
    write_json(&out.join("manifest.json"), &m)?;
    Ok(report.outcome.exit_code())
}

/// Load a trajectory from `dir` or `dir/snapshots`.
pub fn load_trajectory(dir: &Path) -> Result<Trajectory, CliError> {
    let sub = dir.join("snapshots");
    let d = if sub.is_dir() { sub } else { dir.to_path_buf() };
    Ok(Trajectory::load_snapshots(&d)?)
}

/// Cylinder sweep over a stored trajectory.
pub fn cmd_diagnose(trajectory_dir: &Path, config_path: Option<&Path>) -> Result<i32, CliError> {
    let mut cfg = match config_path {
        Some(p) => Config::load(p)?,
        None => Config::empty(Path::new(".")),
    };
    let traj = load_trajectory(trajectory_dir)?;
    let grid = *traj.grid();
    let t_last = *traj.times().last().expect("nonempty trajectory");
    let t_first = traj.times()[0];

    let centers = if cfg.contains("cylinder.center") {
        vec![cfg.vec3_opt("cylinder.center")?.expect("present")]
    } else if let Some(p) = cfg.points_opt("sweep.centers")? {
        p
    } else {
        let per_axis = cfg.usize_or("sweep.centers_per_axis", 3)?;
        SweepSpec::lattice_centers(grid.box_length(), per_axis)
    };
    let center_times = match cfg.f64_opt("cylinder.t")? {
        Some(t) => vec![t],
        None => cfg.f64_list_or("sweep.center_times", &[t_last])?,
    };
    let default_r = (0.5 * (t_last - t_first)).sqrt();
    let radii = match cfg.f64_opt("cylinder.radius")? {
        Some(r) => vec![r],
        None => cfg.f64_list_or("sweep.radii", &[default_r])?,
    };
    let eps0 = cfg.f64_or("sweep.eps0", DEFAULT_EPS0)?;
    let default_out = trajectory_dir.join("diagnostics");
    let out = match cfg.path_opt("output.dir") {
        Some(p) => p,
        None => default_out,
    };
    let workers = settings::workers(&mut cfg)?;
    cfg.check_unused()?;

    let spec = SweepSpec {
        centers,
        center_times,
        radii,
        eps0,
    };
    let rows = with_workers(workers, || -> Result<_, CliError> {
        let pressures = pressure_series(&traj);
        Ok(cylinder_sweep(&traj, &pressures, &spec)?)
    })??;
    let summary = summarize(&rows, eps0);

    fs::create_dir_all(&out)?;
    let csv = out.join("sweep.csv");
    let mut w = create(&csv)?;
    write_sweep_csv(&mut w, &rows)?;
    w.flush()?;
    let m = manifest(
        "diagnose",
        &cfg,
        json!({
            "trajectory_dir": trajectory_dir.display().to_string(),
            "snapshots": traj.len(),
            "t_start": t_first,
            "t_end": t_last,
            "summary": summary,
            "files": ["sweep.csv", "summary.json"],
        }),
    );
    write_json(&out.join("summary.json"), &m)?;
    Ok(0)
}

fn opt_csv(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Run one experiment kind from a configuration; returns 0 on success.
pub fn cmd_experiment(kind: &str, config_path: &Path) -> Result<i32, CliError> {
    let kind = ExperimentKind::parse(kind)?;
    let mut cfg = Config::load(config_path)?;
    let grid = settings::grid(&mut cfg)?;
    let data = settings::data(&mut cfg)?;
    let solver = settings::solver(&mut cfg, 1)?;
    let out = settings::output_dir(&mut cfg, kind.as_str());
    let workers = settings::workers(&mut cfg)?;
    let horizon = solver.horizon;
    let opts = solver.evolve;

    let (report, header, rows): (Value, &str, Vec<String>) = match kind {
        ExperimentKind::Scaling => {
            let lam = cfg.f64_or("experiment.lambda", 2.0)?;
            cfg.check_unused()?;
            let r = with_workers(workers, || -> Result<_, CliError> {
                let u0 = make_initial_data(&data, &grid)?;
                Ok(scaling_covariance_experiment(&u0, lam, horizon, &opts)?)
            })??;
            let row = format!(
                "{:e},{:e},{},{},{},{},{}",
                r.lam,
                r.horizon,
                r.coarse_n,
                r.fine_n,
                r.coarse.outcome,
                r.fine.outcome,
                opt_csv(r.discrepancy)
            );
            (
                serde_json::to_value(&r)?,
                "lambda,horizon,coarse_n,fine_n,coarse_outcome,fine_outcome,discrepancy",
                vec![row],
            )
        }
        ExperimentKind::WeakConvergence => {
            let kind = cfg.choice_or("experiment.perturbation", &["modulation", "translation"], "modulation")?;
            let terms = cfg.usize_or("experiment.terms", 4)?;
            let amp = cfg.f64_or("experiment.perturbation_amplitude", 0.5)?;
            let l = grid.box_length();
            let probe = ProbeRegion {
                center: cfg.vec3_or("probe.center", [0.5 * l; 3])?,
                radius: cfg.f64_or("probe.radius", l / 8.0)?,
            };
            let pert = if kind == "modulation" {
                Perturbation::Modulation {
                    amplitude: amp,
                    base_wavenumber: cfg.i64_or("experiment.base_wavenumber", 1)?,
                }
            } else {
                let shifts = cfg
                    .points_opt("experiment.shifts")?
                    .ok_or_else(|| CliError::new("translation perturbation needs experiment.shifts"))?;
                let profile = make_initial_data(&InitialDataSpec::new(Family::LocalizedBump, amp), &grid)?;
                Perturbation::Translation {
                    profile: Some(profile),
                    shifts,
                }
            };
            cfg.check_unused()?;
            let r = with_workers(workers, || -> Result<_, CliError> {
                let u0 = make_initial_data(&data, &grid)?;
                Ok(weak_convergence_experiment(&u0, &pert, terms, horizon, &opts, &probe)?)
            })??;
            let rows = r
                .rows
                .iter()
                .map(|w| {
                    format!(
                        "{},{:e},{},{:e},{:e},{:e}",
                        w.k, w.audit_norm, w.outcome, w.l3_diff, w.sup_diff, w.grad_sup_diff
                    )
                })
                .collect();
            let mut v = serde_json::to_value(&r)?;
            v["perturbation"] = serde_json::to_value(&pert)?;
            (v, "k,audit_norm,outcome,l3_diff,sup_diff,grad_sup_diff", rows)
        }
        ExperimentKind::Bisection => {
            let bracket = cfg
                .f64_list_opt("experiment.bracket")?
                .ok_or_else(|| CliError::new("bisection needs experiment.bracket = a_lo, a_hi"))?;
            let [lo, hi] = <[f64; 2]>::try_from(bracket)
                .map_err(|_| CliError::new("experiment.bracket needs exactly two amplitudes"))?;
            let tol = cfg.f64_or("experiment.tol", 1e-2)?;
            cfg.check_unused()?;
            let oracle = EvolveOracle {
                spec: data.clone(),
                grid,
                horizon,
                options: opts,
            };
            let r = with_workers(workers, || amplitude_bisection(&oracle, (lo, hi), tol))??;
            let mut rows = Vec::with_capacity(r.runs.len());
            for (i, run) in r.runs.iter().enumerate() {
                let (blo, bhi) = if i < 2 { (lo, hi) } else { r.brackets[i - 2] };
                rows.push(format!(
                    "{i},{:e},{},{:e},{blo:e},{bhi:e}",
                    run.amplitude, run.outcome, run.report.t_end
                ));
            }
            (serde_json::to_value(&r)?, "run,amplitude,outcome,t_end,lower,upper", rows)
        }
        ExperimentKind::Calderon => {
            let eta_abs = cfg.f64_opt("experiment.eta")?;
            let frac = cfg.f64_or("experiment.eta_fraction", 0.1)?;
            let save = cfg.bool_or("experiment.save_parts", true)?;
            cfg.check_unused()?;
            let s = with_workers(workers, || -> Result<_, CliError> {
                let u0 = make_initial_data(&data, &grid)?;
                let eta = eta_abs.unwrap_or(frac * hs_norm(&u0, 0.5));
                Ok(calderon_split(&u0, eta)?)
            })??;
            if save {
                fs::create_dir_all(&out)?;
                let (a0, v0) = s.parts();
                snapshot::save(out.join("a0.nssf"), 0.0, a0)?;
                snapshot::save(out.join("v0.nssf"), 0.0, v0)?;
            }
            let row = format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
                s.eta,
                s.cutoff.inner,
                s.cutoff.outer,
                s.u0_hhalf,
                s.a0_hhalf,
                s.v0_l2,
                s.shells_kept,
                s.shells_total
            );
            (
                serde_json::to_value(&s)?,
                "eta,cutoff_inner,cutoff_outer,u0_hhalf,a0_hhalf,v0_l2,shells_kept,shells_total",
                vec![row],
            )
        }
        ExperimentKind::Decay => {
            let seeds = cfg.u64_list_or("experiment.seeds", &[0, 1, 2, 3, 4])?;
            cfg.check_unused()?;
            let e = with_workers(workers, || decay_ensemble(&data, &seeds, &grid, horizon, &opts))??;
            let rows = e
                .members
                .iter()
                .map(|m| {
                    format!(
                        "{},{},{:e},{:e},{:e},{:e}",
                        m.seed, m.outcome, m.nse_peak, m.linear_peak, m.relative_gap, m.nse_peak_time
                    )
                })
                .collect();
            (
                serde_json::to_value(&e)?,
                "seed,outcome,nse_peak,linear_peak,relative_gap,nse_peak_time",
                rows,
            )
        }
    };

    fs::create_dir_all(&out)?;
    let csv_name = format!("{}.csv", kind.as_str());
    write_csv(&out.join(&csv_name), header, &rows)?;
    let m = manifest(
        "experiment",
        &cfg,
        json!({
            "kind": kind.as_str(),
            "report": report,
            "files": [csv_name, "manifest.json"],
        }),
    );
    write_json(&out.join("manifest.json"), &m)?;
    Ok(0)
}
