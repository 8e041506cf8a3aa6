//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 5`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;

use hhalf_core::diagnostics::{
    ckn_quantity, local_energy_terms, time_mollify, BumpTestFunction, ParabolicCylinder,
};
use hhalf_core::experiments::{
    calderon_split, decay_ensemble, make_initial_data, picard_contraction_sweep, scaling_covariance_experiment,
    weak_convergence_experiment, InitialDataSpec, Perturbation, ProbeRegion,
};
use hhalf_core::ops::{divergence, hs_norm, leray_project, riesz_multiply, Axis};
use hhalf_core::pressure::pressure_series;
use hhalf_core::solver::{evolve_with, heat_propagate, picard_solve_with, EvolveOptions, PicardOptions};
use hhalf_core::{Grid, Outcome, ScalarSpectralField, SpectralVelocity};

const OPERATOR_TOL: f64 = 1e-12;
const OPERATOR_BUDGET_S: f64 = 1.0;
const ENERGY_TOL: f64 = 1e-6;
const MILD_TOL: f64 = 1e-6;
const CKN_SLOPE: f64 = 3.0;
const CKN_SLOPE_TOL: f64 = 0.3;
const SCALING_TOL: f64 = 1e-6;
const DECAY_TOL: f64 = 0.10;
const LOCAL_ENERGY_TOL: f64 = 1e-5;

type Verdict = Result<(bool, String), String>;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rel(a: &SpectralVelocity, b: &SpectralVelocity) -> f64 {
    hs_norm(&a.sub(b).unwrap(), 0.5) / hs_norm(b, 0.5)
}

fn operator_exactness() -> Verdict {
    let start = Instant::now();
    let g = Grid::periodic(32).map_err(|e| e.to_string())?;
    let mut worst = [0.0f64; 4];
    for seed in 0..3 {
        let raw = make_initial_data(&InitialDataSpec::random(1.0, seed, -1.0), &g).map_err(|e| e.to_string())?;
        // add a gradient part so the projection has something to remove
        let phi = ScalarSpectralField::from_modes(g, &[([2, -1, 3], Complex64::new(0.3, 0.1)), ([1, 4, 0], Complex64::new(-0.2, 0.5))])
            .map_err(|e| e.to_string())?;
        let grad = hhalf_core::ops::gradient(&phi);
        let u = raw.add(&grad).unwrap();
        let p = leray_project(&u);
        let pp = leray_project(&p);
        worst[0] = worst[0].max(hs_norm(&pp.sub(&p).unwrap(), 0.0) / hs_norm(&u, 0.0));
        worst[1] = worst[1].max(hs_norm(&divergence(&p), 0.0) / hs_norm(&u, 1.0));
        for (s, t) in [(0.01, 0.02), (0.1, 0.3), (0.5, 0.25)] {
            let a = heat_propagate(&heat_propagate(&p, s).unwrap(), t).unwrap();
            let b = heat_propagate(&p, s + t).unwrap();
            worst[2] = worst[2].max(hs_norm(&a.sub(&b).unwrap(), 0.0) / hs_norm(&b, 0.0));
        }
        let f = ScalarSpectralField::from_coeffs(g, raw.comp(0).to_vec()).map_err(|e| e.to_string())?;
        let mut trace = ScalarSpectralField::zeros(g);
        for ax in Axis::ALL {
            trace = trace.add(&riesz_multiply(ax, ax, &f)).unwrap();
        }
        worst[3] = worst[3].max(hs_norm(&trace.add(&f).unwrap(), 0.0) / hs_norm(&f, 0.0));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.iter().all(|w| *w <= OPERATOR_TOL) && secs < OPERATOR_BUDGET_S;
    Ok((
        ok,
        format!(
            "idempotence {:.1e}, divergence {:.1e}, semigroup {:.1e}, riesz trace {:.1e} (tol {OPERATOR_TOL:.0e}), {secs:.2} s",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn energy_budget() -> Verdict {
    let g = Grid::periodic(64).map_err(|e| e.to_string())?;
    let u0 = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).map_err(|e| e.to_string())?;
    let (_, rep) = evolve_with(&u0, 1.0, &EvolveOptions::new(1e-3).with_stride(0)).map_err(|e| e.to_string())?;
    let defect = rep.energy_budget_defect();
    Ok((
        rep.outcome == Outcome::Completed && defect <= ENERGY_TOL,
        format!(
            "max |E(t)+2∫‖∇u‖²−E(0)|/E(0) = {defect:.2e} over {} samples (tol {ENERGY_TOL:.0e}), outcome {}",
            rep.samples.len(),
            rep.outcome
        ),
    ))
}

fn mild_strong_agreement() -> Verdict {
    let g = Grid::periodic(32).map_err(|e| e.to_string())?;
    let u0 = make_initial_data(&InitialDataSpec::taylor_green(0.1), &g).map_err(|e| e.to_string())?;
    let horizon = 0.25;
    let (ev, _) = evolve_with(&u0, horizon, &EvolveOptions::new(1e-3).with_stride(0)).map_err(|e| e.to_string())?;
    let opts = PicardOptions {
        intervals: 128,
        ..Default::default()
    };
    let (pc, rep) = picard_solve_with(&u0, horizon, 1e-12, 60, &opts).map_err(|e| e.to_string())?;
    let d = rel(pc.last().unwrap(), ev.last().unwrap());
    Ok((
        d <= MILD_TOL,
        format!(
            "relative Ḣ^1/2 gap at T={horizon}: {d:.2e} (tol {MILD_TOL:.0e}), {} Picard iterations",
            rep.picard_iterations.unwrap_or(0)
        ),
    ))
}

fn picard_contraction() -> Verdict {
    let g = Grid::periodic(16).map_err(|e| e.to_string())?;
    let spec = InitialDataSpec::taylor_green(1.0);
    let opts = PicardOptions {
        intervals: 32,
        quad_points: 256,
        ..Default::default()
    };
    let run = || picard_contraction_sweep(&spec, &g, 0.25, 0.25, 10, 1e-10, 80, &opts).map_err(|e| e.to_string());
    let a = run()?;
    let b = run()?;
    let first = &a.rows[0];
    let geometric = first.contracting && first.max_ratio < 1.0;
    let reproducible = a == b;
    let fail = a.failure_amplitude;
    Ok((
        geometric && fail.is_some() && reproducible,
        format!(
            "amplitude {} (‖U‖_X {:.3}) max ratio {:.3}; last contracting {:?}, failure amplitude {:?}, rerun identical: {reproducible}",
            first.amplitude, first.u_x_norm, first.max_ratio, a.last_contracting, fail
        ),
    ))
}

fn ckn_scaling() -> Verdict {
    let g = Grid::periodic(16).map_err(|e| e.to_string())?;
    let u0 = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).map_err(|e| e.to_string())?;
    let (pre, _) = evolve_with(&u0, 0.1, &EvolveOptions::new(1e-3).with_stride(0)).map_err(|e| e.to_string())?;
    let radii = [0.24, 0.12, 0.06, 0.03];
    let span = radii[0] * radii[0] + 0.005;
    let (traj, _) =
        evolve_with(pre.last().unwrap(), span, &EvolveOptions::new(1e-4).with_stride(1)).map_err(|e| e.to_string())?;
    let ps = pressure_series(&traj);
    // u(0, π/2, π/2) = (1, 0, 0) for Taylor–Green: a regular point with u ≠ 0
    let x0 = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2];
    let mut vals = Vec::new();
    for &r in &radii {
        let cyl = ParabolicCylinder::new(x0, span, r).map_err(|e| e.to_string())?;
        vals.push(ckn_quantity(&traj, &ps, &cyl).map_err(|e| e.to_string())?);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok((
        (slope - CKN_SLOPE).abs() <= CKN_SLOPE_TOL,
        format!("log-log slope {slope:.3} over r = {radii:?} (target {CKN_SLOPE} ± {CKN_SLOPE_TOL}); values {}", sci(&vals)),
    ))
}

fn scaling_covariance() -> Verdict {
    let g = Grid::periodic(32).map_err(|e| e.to_string())?;
    let u0 = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).map_err(|e| e.to_string())?;
    let r = scaling_covariance_experiment(&u0, 2.0, 0.25, &EvolveOptions::new(2e-3)).map_err(|e| e.to_string())?;
    let d = r.discrepancy;
    Ok((
        d.is_some_and(|d| d < SCALING_TOL),
        format!("λ=2, N={}→{}: relative Ḣ^1/2 discrepancy {} (tol {SCALING_TOL:.0e})", r.coarse_n, r.fine_n, d.map_or("none".into(), |d| format!("{d:.2e}"))),
    ))
}

fn calderon() -> Verdict {
    let g = Grid::periodic(32).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut kept = Vec::new();
    for seed in 0..10 {
        let u = make_initial_data(&InitialDataSpec::random(1.0, seed, -1.0), &g).map_err(|e| e.to_string())?;
        let eta = 0.1 * hs_norm(&u, 0.5);
        let s = calderon_split(&u, eta).map_err(|e| e.to_string())?;
        let (a, v) = s.parts();
        ok &= a.add(v).unwrap() == u && s.a0_hhalf < eta && s.v0_l2.is_finite();
        worst_ratio = worst_ratio.max(s.a0_hhalf / eta);
        kept.push(s.shells_kept);
    }
    Ok((
        ok,
        format!("10 fields: reconstruction bit-exact, max ‖a₀‖/η = {worst_ratio:.3}, shells kept {kept:?}"),
    ))
}

fn weak_convergence() -> Verdict {
    let g = Grid::periodic(64).map_err(|e| e.to_string())?;
    let u0 = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).map_err(|e| e.to_string())?;
    let pert = Perturbation::Modulation {
        amplitude: 0.5,
        base_wavenumber: 1,
    };
    let l = g.box_length();
    let probe = ProbeRegion {
        center: [0.3 * l, 0.4 * l, 0.25 * l],
        radius: l / 8.0,
    };
    let opts = EvolveOptions::new(5e-3).with_stride(10);
    let r = weak_convergence_experiment(&u0, &pert, 4, 0.5, &opts, &probe).map_err(|e| e.to_string())?;
    let l3: Vec<f64> = r.rows.iter().map(|w| w.l3_diff).collect();
    let sup: Vec<f64> = r.rows.iter().map(|w| w.sup_diff).collect();
    Ok((
        r.l3_decreasing_last3 && r.sup_decreasing_last3,
        format!("L³ diffs {}; sup diffs {}", sci(&l3), sci(&sup)),
    ))
}

fn decay() -> Verdict {
    let g = Grid::periodic(32).map_err(|e| e.to_string())?;
    let spec = InitialDataSpec::random(0.05, 0, -1.0);
    let e = decay_ensemble(&spec, &[0, 1, 2, 3, 4], &g, 0.5, &EvolveOptions::new(2e-3)).map_err(|e| e.to_string())?;
    let gaps: Vec<f64> = e.members.iter().map(|m| m.relative_gap).collect();
    let done = e.members.iter().all(|m| m.outcome == Outcome::Completed);
    Ok((
        done && e.max_relative_gap <= DECAY_TOL,
        format!("relative gaps {} (tol {DECAY_TOL})", sci(&gaps)),
    ))
}

fn local_energy() -> Verdict {
    let g = Grid::periodic(32).map_err(|e| e.to_string())?;
    let u0 = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).map_err(|e| e.to_string())?;
    let (traj, _) = evolve_with(&u0, 0.5, &EvolveOptions::new(1e-3).with_stride(5)).map_err(|e| e.to_string())?;
    let ps = pressure_series(&traj);
    let phis = [
        BumpTestFunction::new([1.0, 0.7, 2.0], 1.0, 0.25, 0.2),
        BumpTestFunction::new([3.0, 2.0, 1.0], 1.2, 0.3, 0.15),
        BumpTestFunction::new([0.2, 4.0, 5.5], 0.8, 0.2, 0.18),
    ];
    let mut worst = 0.0f64;
    for phi in &phis {
        let phi = phi.as_ref().map_err(|e| e.to_string())?;
        let b = local_energy_terms(&traj, &ps, phi).map_err(|e| e.to_string())?;
        worst = worst.max(b.residual.abs() / b.dissipation);
    }
    let smooth = time_mollify(&traj, 3).map_err(|e| e.to_string())?;
    let sps = pressure_series(&smooth);
    let mut lowest = f64::INFINITY;
    for phi in &phis {
        let phi = phi.as_ref().map_err(|e| e.to_string())?;
        let b = local_energy_terms(&smooth, &sps, phi).map_err(|e| e.to_string())?;
        lowest = lowest.min(b.residual / b.dissipation);
    }
    Ok((
        worst < LOCAL_ENERGY_TOL && lowest >= -LOCAL_ENERGY_TOL,
        format!(
            "max |residual|/dissipation {worst:.2e} (tol {LOCAL_ENERGY_TOL:.0e}); filtered min residual/dissipation {lowest:.2e} (≥ −{LOCAL_ENERGY_TOL:.0e})"
        ),
    ))
}

fn csv_files(dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            csv_files(&p, out);
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()));
        }
    }
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_hhalf");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run_cfg = "grid.n = 16\ndata.family = random_divfree\ndata.seed = 11\ndata.amplitude = 1.0\n\
                   data.spectrum_slope = -1.5\nsolver.horizon = 0.1\nsolver.dt = 0.002\nsolver.stride = 2\n\
                   runtime.workers = 2\n";
    let sweep_cfg = "sweep.centers_per_axis = 2\nsweep.radii = 0.3, 0.2\nsweep.center_times = 0.1\nruntime.workers = 2\n";
    let cal_cfg = "grid.n = 16\ndata.family = random_divfree\ndata.seed = 5\nruntime.workers = 2\n";
    let mut outputs = Vec::new();
    for rep in ["a", "b"] {
        let d = tmp.path().join(rep);
        fs::create_dir_all(&d).unwrap();
        fs::write(d.join("run.cfg"), format!("{run_cfg}output.dir = run\n")).unwrap();
        fs::write(d.join("sweep.cfg"), format!("{sweep_cfg}output.dir = diag\n")).unwrap();
        fs::write(d.join("cal.cfg"), format!("{cal_cfg}output.dir = cal\n")).unwrap();
        let steps: [&[&str]; 4] = [
            &["run", "run.cfg"],
            &["diagnose", "run", "sweep.cfg"],
            &["experiment", "calderon", "cal.cfg"],
            &["experiment", "scaling", "run.cfg"],
        ];
        for args in steps {
            let o = Command::new(bin).args(args).current_dir(&d).output().map_err(|e| e.to_string())?;
            if !o.status.success() {
                return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&o.stderr)));
            }
        }
        let mut files = Vec::new();
        csv_files(&d, &mut files);
        outputs.push(files);
    }
    let same = outputs[0] == outputs[1];
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    Ok((same && names.len() >= 4, format!("{} CSV files byte-identical across reruns: {names:?}", names.len())))
}

struct Criterion {
    id: usize,
    name: &'static str,
    run: fn() -> Verdict,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "operator exactness", run: operator_exactness },
        Criterion { id: 2, name: "energy budget", run: energy_budget },
        Criterion { id: 3, name: "mild/strong agreement", run: mild_strong_agreement },
        Criterion { id: 4, name: "Picard contraction", run: picard_contraction },
        Criterion { id: 5, name: "CKN scaling law", run: ckn_scaling },
        Criterion { id: 6, name: "scaling covariance", run: scaling_covariance },
        Criterion { id: 7, name: "Calderón split", run: calderon },
        Criterion { id: 8, name: "weak-convergence stability", run: weak_convergence },
        Criterion { id: 9, name: "decay diagnostic", run: decay },
        Criterion { id: 10, name: "local energy identity", run: local_energy },
        Criterion { id: 11, name: "determinism", run: determinism },
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let t = Instant::now();
        let (ok, detail) = match (c.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} [{:02}] {} ({:.1} s): {detail}", c.id, c.name, t.elapsed().as_secs_f64());
        if !ok {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
