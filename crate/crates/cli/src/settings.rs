//! Typed settings read from a [`Config`].

use std::path::PathBuf;

use hhalf_core::experiments::{Family, InitialDataSpec};
use hhalf_core::solver::{EvolveOptions, PicardOptions, DEFAULT_CFL_LIMIT, DEFAULT_QUAD_POINTS};
use hhalf_core::{Caps, Grid};

use crate::config::Config;
use crate::CliError;

const FAMILIES: &[&str] = &["taylor_green", "beltrami", "random_divfree", "localized_bump", "from_file"];

pub fn grid(cfg: &mut Config) -> Result<Grid, CliError> {
    let n = cfg.usize_or("grid.n", 32)?;
    let l = cfg.f64_or("grid.box_length", std::f64::consts::TAU)?;
    let frac = cfg.f64_or("grid.dealias", 2.0 / 3.0)?;
    Ok(Grid::new(n, l)?.with_dealias(frac)?)
}

pub fn data(cfg: &mut Config) -> Result<InitialDataSpec, CliError> {
    let family = cfg.choice_or("data.family", FAMILIES, "taylor_green")?;
    let mut spec = InitialDataSpec::new(Family::parse(&family).expect("checked choice"), cfg.f64_or("data.amplitude", 1.0)?);
    spec.seed = cfg.u64_or("data.seed", 0)?;
    spec.spectrum_slope = cfg.f64_or("data.spectrum_slope", -2.0)?;
    spec.offset = cfg.vec3_or("data.offset", [0.0; 3])?;
    spec.ring_radius = cfg.f64_opt("data.ring_radius")?;
    spec.core_radius = cfg.f64_opt("data.core_radius")?;
    spec.path = cfg.path_opt("data.path");
    if spec.family == Family::FromFile && spec.path.is_none() {
        return Err(CliError::new("data.family = from_file needs data.path"));
    }
    Ok(spec)
}

pub fn caps(cfg: &mut Config) -> Result<Caps, CliError> {
    let d = Caps::default();
    Ok(Caps {
        hhalf_factor: cfg.f64_or("caps.hhalf_factor", d.hhalf_factor)?,
        tail_fraction: cfg.f64_or("caps.tail_fraction", d.tail_fraction)?,
        x_norm: cfg.f64_or("caps.x_norm", d.x_norm)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Evolve,
    Picard,
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub method: Method,
    pub horizon: f64,
    pub evolve: EvolveOptions,
    pub picard: PicardOptions,
    pub tol: f64,
    pub max_iter: usize,
}

pub fn solver(cfg: &mut Config, default_stride: usize) -> Result<SolverSettings, CliError> {
    let method = match cfg.choice_or("solver.method", &["evolve", "picard"], "evolve")?.as_str() {
        "picard" => Method::Picard,
        _ => Method::Evolve,
    };
    let horizon = cfg.f64_or("solver.horizon", 1.0)?;
    let evolve = EvolveOptions {
        dt: cfg.f64_or("solver.dt", 1e-3)?,
        stride: cfg.usize_or("solver.stride", default_stride)?,
        caps: caps(cfg)?,
        cfl_limit: cfg.f64_or("solver.cfl_limit", DEFAULT_CFL_LIMIT)?,
        stop_on_cap: cfg.bool_or("solver.stop_on_cap", true)?,
    };
    let d = PicardOptions::default();
    let picard = PicardOptions {
        intervals: cfg.usize_or("picard.intervals", d.intervals)?,
        quad_points: cfg.usize_or("picard.quad_points", DEFAULT_QUAD_POINTS)?,
        divergence_factor: cfg.f64_or("picard.divergence_factor", d.divergence_factor)?,
        patience: cfg.usize_or("picard.patience", d.patience)?,
    };
    let tol = cfg.f64_or("picard.tol", 1e-10)?;
    let max_iter = cfg.usize_or("picard.max_iter", 50)?;
    Ok(SolverSettings {
        method,
        horizon,
        evolve,
        picard,
        tol,
        max_iter,
    })
}

pub fn output_dir(cfg: &mut Config, default: &str) -> PathBuf {
    cfg.path_or("output.dir", default)
}

pub fn workers(cfg: &mut Config) -> Result<usize, CliError> {
    cfg.usize_or("runtime.workers", 1)
}
