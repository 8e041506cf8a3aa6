//! Pressure recovery and the local pressure decomposition `p = p̃ + h`.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{PhysicalField, ScalarSpectralField, SpectralField, SpectralVelocity, ZERO};
use crate::grid::Grid;
use crate::ops::{forward_many, laplacian_power, physical_dealiased};
use crate::sample::LocalLattice;
use crate::snapshot;
use crate::solver::Trajectory;

/// Slots of the symmetric products `u_i u_j` in the order produced below.
const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn product_fields(u: &SpectralVelocity, weight: Option<&[f64]>) -> Vec<Vec<f64>> {
    let up = physical_dealiased(u);
    PAIRS
        .iter()
        .map(|&(a, b)| match weight {
            None => up[a].iter().zip(&up[b]).map(|(x, y)| x * y).collect(),
            Some(w) => up[a]
                .iter()
                .zip(&up[b])
                .zip(w)
                .map(|((x, y), c)| x * y * c)
                .collect(),
        })
        .collect()
}

/// `Σ_ij R_i R_j w_ij` for the six symmetric product spectra.
fn riesz_contract(g: &Grid, spectra: &[Vec<Complex64>]) -> ScalarSpectralField {
    let k = g.wavenumbers();
    let n = g.n();
    let mut out = vec![ZERO; g.len()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                let kv = [k[i], k[j], k[l]];
                let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
                if k2 == 0.0 {
                    continue;
                }
                let mut s = ZERO;
                for (slot, &(a, b)) in PAIRS.iter().enumerate() {
                    let m = if a == b { 1.0 } else { 2.0 };
                    s += spectra[slot][idx] * (m * kv[a] * kv[b]);
                }
                out[idx] = -s / k2;
            }
        }
    }
    ScalarSpectralField::from_raw(*g, out)
}

/// Pressure with zero spatial mean: `p̂ = -(k_i k_j / |k|²) (u_i u_j)^`.
pub fn pressure_from_velocity(u: &SpectralVelocity) -> ScalarSpectralField {
    let g = *u.grid();
    let spectra = forward_many(&g, &product_fields(u, None));
    riesz_contract(&g, &spectra)
}

/// Pressure at every snapshot of a trajectory.
pub fn pressure_series(traj: &Trajectory) -> Vec<ScalarSpectralField> {
    traj.snapshots().par_iter().map(pressure_from_velocity).collect()
}

/// Region carrying the cutoff `χ` of the local decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PressureWindow {
    /// `χ = 1` on the ball up to `1e-3`, with a Gaussian-smoothed edge of
    /// width `transition_width` placed outside it.
    Ball {
        center: [f64; 3],
        radius: f64,
        transition_width: f64,
    },
    /// `χ ≡ 1`.
    WholeBox,
}

impl PressureWindow {
    /// Ball window with a two-cell transition band.
    pub fn ball(grid: &Grid, center: [f64; 3], radius: f64) -> Result<Self> {
        let limit = grid.max_ball_radius();
        if !(radius > 0.0 && radius < limit) {
            return Err(Error::BallTooLarge { radius, limit });
        }
        let transition_width = 2.0 * grid.dx();
        // the Gaussian tail must be negligible where the minimum image wraps
        if radius + (EDGE_OFFSET + 4.0 * SQRT_2) * transition_width > 0.5 * grid.box_length() {
            return Err(Error::BallTooLarge { radius, limit });
        }
        Ok(PressureWindow::Ball {
            center,
            radius,
            transition_width,
        })
    }

    /// Values of `χ` on the collocation lattice.
    pub fn cutoff(&self, grid: &Grid) -> Vec<f64> {
        match *self {
            PressureWindow::WholeBox => vec![1.0; grid.len()],
            PressureWindow::Ball {
                center,
                radius,
                transition_width,
            } => PhysicalField::from_fn(*grid, |x| {
                let d = (0..3)
                    .map(|a| grid.periodic_delta(x[a], center[a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let s = (d - radius - EDGE_OFFSET * transition_width) / (SQRT_2 * transition_width);
                [0.5 * libm::erfc(s)]
            })
            .expect("grid already validated")
            .into_values()
            .remove(0),
        }
    }
}

/// Edge position beyond the ball radius, in units of the transition width.
const EDGE_OFFSET: f64 = 3.0;

/// `p̃ = Σ R_i R_j (u_i u_j χ)` and `h = p - p̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSplit {
    pub p_tilde: ScalarSpectralField,
    pub h: ScalarSpectralField,
    pub window: PressureWindow,
}

pub fn windowed_pressure_split(
    u: &SpectralVelocity,
    p: &ScalarSpectralField,
    window: &PressureWindow,
) -> Result<PressureSplit> {
    let g = *u.grid();
    g.check_same(p.grid())?;
    if let PressureWindow::Ball { radius, .. } = window {
        let limit = g.max_ball_radius();
        if !(*radius > 0.0 && *radius < limit) {
            return Err(Error::BallTooLarge { radius: *radius, limit });
        }
    }
    let chi = window.cutoff(&g);
    let spectra = forward_many(&g, &product_fields(u, Some(&chi)));
    let p_tilde = riesz_contract(&g, &spectra);
    let h = p.sub(&p_tilde)?;
    Ok(PressureSplit {
        p_tilde,
        h,
        window: *window,
    })
}

/// `‖Δh‖_{L²(fraction·B)} / ‖Δp̃‖_{L²}`: how far `h` is from harmonic inside the ball.
pub fn harmonic_residual(split: &PressureSplit, fraction: f64) -> Result<f64> {
    let PressureWindow::Ball { center, radius, .. } = split.window else {
        return Err(invalid("harmonic residual needs a ball window"));
    };
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let g = *split.h.grid();
    let lap_h = laplacian_power(&split.h, 1.0);
    let lap_t = laplacian_power(&split.p_tilde, 1.0);
    let refine = refinement(&g, fraction * radius, 12);
    let ball = LocalLattice::ball(&g, center, fraction * radius, refine)?;
    let vals = &ball.sample(&[lap_h.coeffs()])[0];
    let num = ball.integrate(&vals.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
    let den = crate::ops::hs_norm(&lap_t, 0.0);
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Lattice refinement giving at least `per_radius` points across a radius.
pub(crate) fn refinement(g: &Grid, radius: f64, per_radius: usize) -> usize {
    ((per_radius as f64 * g.dx() / radius).ceil() as usize).clamp(1, 64)
}

/// Numerator and denominator of the oscillation ratio from sampled values.
pub(crate) fn oscillation_ratio_from_samples(
    small: &[f64],
    big: &[f64],
    big_cell_volume: f64,
    r_small: f64,
    r_big: f64,
    gamma: f64,
) -> f64 {
    let mean = small.iter().sum::<f64>() / small.len() as f64;
    let osc = small.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max).powf(gamma);
    let avg = big.iter().map(|v| v.abs().powf(gamma)).sum::<f64>() * big_cell_volume / r_big.powi(3);
    let den = (r_small / r_big).powf(gamma) * avg;
    if osc == 0.0 {
        0.0
    } else {
        osc / den
    }
}

/// `sup_{B(x0,r')} |h - mean h|^γ / ((r'/r)^γ r^{-3} ∫_{B(x0,r)} |h|^γ)`.
pub fn harmonic_oscillation_ratio(
    h: &ScalarSpectralField,
    x0: [f64; 3],
    r_small: f64,
    r_big: f64,
    gamma: f64,
) -> Result<f64> {
    let g = *h.grid();
    if !(r_small > 0.0 && r_small <= 0.5 * r_big) {
        return Err(invalid(format!(
            "need 0 < r_small <= r_big/2, got r_small={r_small}, r_big={r_big}"
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    let limit = g.max_ball_radius();
    if r_big >= limit {
        return Err(Error::BallTooLarge { radius: r_big, limit });
    }
    let small = LocalLattice::ball(&g, x0, r_small, refinement(&g, r_small, 8))?;
    let big = LocalLattice::ball(&g, x0, r_big, refinement(&g, r_big, 16))?;
    let sv = &small.sample(&[h.coeffs()])[0];
    let bv = &big.sample(&[h.coeffs()])[0];
    Ok(oscillation_ratio_from_samples(sv, bv, big.cell_volume(), r_small, r_big, gamma))
}

/// JSON sidecar written next to a saved split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSidecar {
    pub time: f64,
    pub window: PressureWindow,
    pub p_tilde_file: String,
    pub h_file: String,
}

impl PressureSplit {
    /// Writes `<stem>_p_tilde.nssf`, `<stem>_h.nssf` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str, time: f64) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let pt = format!("{stem}_p_tilde.nssf");
        let hf = format!("{stem}_h.nssf");
        snapshot::save(&dir.join(&pt), time, &self.p_tilde)?;
        snapshot::save(&dir.join(&hf), time, &self.h)?;
        let side = SplitSidecar {
            time,
            window: self.window,
            p_tilde_file: pt,
            h_file: hf,
        };
        let path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&side).map_err(|e| invalid(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{make_initial_data, Family, InitialDataSpec};
    use crate::ops::{hs_norm, nonlinear_term};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn beltrami_pressure_is_minus_half_speed_squared() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::beltrami(0.9), &g).unwrap();
        let p = pressure_from_velocity(&u).to_physical();
        let up = u.to_physical();
        let q: Vec<f64> = (0..g.len()).map(|i| -0.5 * up.magnitude_at(i).powi(2)).collect();
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        for i in 0..g.len() {
            assert!((p.component(0)[i] - (q[i] - mean)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_velocity_gives_zero_pressure() {
        let g = Grid::periodic(8).unwrap();
        assert!(pressure_from_velocity(&SpectralVelocity::zeros(g)).is_zero());
    }

    #[test]
    fn two_mode_field_matches_brute_force_convolution() {
        let g = Grid::periodic(8).unwrap();
        let modes = [
            ([1, 0, 0], [ZERO, c(0.3, 0.2), c(-0.1, 0.4)]),
            ([0, 1, 1], [c(0.5, -0.1), c(0.2, 0.0), c(-0.2, 0.0)]),
        ];
        let u = crate::ops::leray_project(&SpectralVelocity::from_modes(g, &modes).unwrap());
        let p = pressure_from_velocity(&u);
        // explicit convolution over the nonzero modes
        let support: Vec<([i64; 3], [Complex64; 3])> = (0..g.len())
            .filter(|&i| u.mode(i).iter().any(|v| *v != ZERO))
            .map(|i| {
                let (a, b, l) = g.unindex(i);
                ([g.signed(a), g.signed(b), g.signed(l)], u.mode(i))
            })
            .collect();
        let cutoff = g.cutoff();
        for idx in 0..g.len() {
            let (a, b, l) = g.unindex(idx);
            let m = [g.signed(a), g.signed(b), g.signed(l)];
            let kept = g.kept(a, b, l);
            let mut w = [[ZERO; 3]; 3];
            for (p1, v1) in &support {
                for (p2, v2) in &support {
                    if (0..3).all(|d| p1[d] + p2[d] == m[d]) {
                        for i in 0..3 {
                            for j in 0..3 {
                                w[i][j] += v1[i] * v2[j];
                            }
                        }
                    }
                }
            }
            let k2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
            let want = if k2 == 0.0 || !kept || m.iter().any(|v| v.abs() > cutoff) {
                ZERO
            } else {
                let mut s = ZERO;
                for i in 0..3 {
                    for j in 0..3 {
                        s += w[i][j] * (m[i] * m[j]) as f64;
                    }
                }
                -s / k2
            };
            assert!((p.coeffs()[idx] - want).norm() < 1e-14, "mode {m:?}");
        }
    }

    #[test]
    fn pressure_cancels_gradient_part_of_the_momentum_equation() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::random(0.8, 11, -1.0), &g).unwrap();
        let p = pressure_from_velocity(&u);
        let nt = nonlinear_term(&u, &u).unwrap();
        let k = g.wavenumbers();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in 0..g.len() {
            let (a, b, l) = g.unindex(idx);
            let kv = [k[a], k[b], k[l]];
            let m = nt.mode(idx);
            let r: Complex64 = (0..3).map(|d| (m[d] + c(0.0, kv[d]) * p.coeffs()[idx]) * kv[d]).sum();
            worst = worst.max(r.norm());
            scale = scale.max(m.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        assert!(worst <= 1e-12 * scale.max(1.0));
        assert_eq!(p.coeffs()[0], ZERO);
    }

    #[test]
    fn whole_box_window_reproduces_pressure() {
        let g = Grid::periodic(64).unwrap();
        let u = make_initial_data(&InitialDataSpec::random(0.5, 2, -1.5), &g).unwrap();
        let p = pressure_from_velocity(&u);
        let s = windowed_pressure_split(&u, &p, &PressureWindow::WholeBox).unwrap();
        assert_eq!(s.p_tilde, p);
        assert!(s.h.is_zero());
        let ball = PressureWindow::ball(&g, [1.0, 2.0, 3.0], 1.0).unwrap();
        let s = windowed_pressure_split(&u, &p, &ball).unwrap();
        let back = s.p_tilde.add(&s.h).unwrap();
        let scale = p.coeffs().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).norm() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn oversized_ball_is_rejected() {
        let g = Grid::periodic(16).unwrap();
        assert!(matches!(
            PressureWindow::ball(&g, [0.0; 3], g.box_length() / 4.0),
            Err(Error::BallTooLarge { .. })
        ));
    }

    #[test]
    fn distant_flow_leaves_little_local_pressure() {
        let g = Grid::periodic(64).unwrap();
        let l = g.box_length();
        let mut spec = InitialDataSpec::new(Family::LocalizedBump, 1.0);
        spec.ring_radius = Some(l / 10.0);
        spec.core_radius = Some(l / 20.0);
        let u = make_initial_data(&spec, &g).unwrap();
        let p = pressure_from_velocity(&u);
        // bump centered at L/2; ball around the origin corner
        let win = PressureWindow::ball(&g, [0.0; 3], l / 8.0).unwrap();
        let s = windowed_pressure_split(&u, &p, &win).unwrap();
        let probe = LocalLattice::ball(&g, [0.0; 3], l / 16.0, 2).unwrap();
        let norm32 = |f: &ScalarSpectralField, lat: &LocalLattice| {
            let v = &lat.sample(&[f.coeffs()])[0];
            lat.integrate(&v.iter().map(|x| x.abs().powf(1.5)).collect::<Vec<_>>()).powf(2.0 / 3.0)
        };
        let p_global = crate::ops::lp_norm(&p.to_physical(), 1.5).unwrap();
        assert!(norm32(&s.p_tilde, &probe) < 1e-3 * p_global);
    }

    #[test]
    fn beltrami_remainder_is_nearly_harmonic_in_the_ball() {
        let g = Grid::periodic(64).unwrap();
        let u = make_initial_data(&InitialDataSpec::beltrami(1.0), &g).unwrap();
        let p = pressure_from_velocity(&u);
        let win = PressureWindow::ball(&g, [1.0, 2.0, 3.0], g.box_length() / 8.0).unwrap();
        let s = windowed_pressure_split(&u, &p, &win).unwrap();
        let r = harmonic_residual(&s, 0.9).unwrap();
        assert!(r < 1e-2, "residual ratio {r}");
    }

    #[test]
    fn oscillation_ratio_of_polynomials() {
        let g = Grid::periodic(32).unwrap();
        let r_big = 1.0;
        let sample = |f: &dyn Fn([f64; 3]) -> f64, r: f64, refine: usize| {
            let lat = LocalLattice::ball(&g, [0.0; 3], r, refine).unwrap();
            let v: Vec<f64> = lat.offsets().iter().map(|d| f(*d)).collect();
            (v, lat.cell_volume())
        };
        let ratio = |f: &dyn Fn([f64; 3]) -> f64, r_small: f64| {
            let (s, _) = sample(f, r_small, refinement(&g, r_small, 8));
            let (b, vol) = sample(f, r_big, refinement(&g, r_big, 16));
            oscillation_ratio_from_samples(&s, &b, vol, r_small, r_big, 1.5)
        };
        let linear = |x: [f64; 3]| 0.3 * x[0] - 0.7 * x[1] + 0.2 * x[2];
        let (a, b) = (ratio(&linear, 0.4), ratio(&linear, 0.1));
        assert!((a / b - 1.0).abs() < 0.05, "{a} vs {b}");
        assert_eq!(ratio(&|_| 2.5, 0.2), 0.0);
        let cubic = |x: [f64; 3]| x[0].powi(3) - 3.0 * x[0] * x[1] * x[1];
        let seq: Vec<f64> = [0.4, 0.2, 0.1].iter().map(|&r| ratio(&cubic, r)).collect();
        assert!(seq[0] > seq[1] && seq[1] > seq[2], "{seq:?}");
        let h = ScalarSpectralField::zeros(g);
        assert!(harmonic_oscillation_ratio(&h, [0.0; 3], 0.6, 1.0, 1.5).is_err());
    }

    #[test]
    fn split_sidecar_records_the_window() {
        let g = Grid::periodic(64).unwrap();
        let u = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).unwrap();
        let p = pressure_from_velocity(&u);
        let win = PressureWindow::ball(&g, [1.0; 3], 1.0).unwrap();
        let s = windowed_pressure_split(&u, &p, &win).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = s.save(dir.path(), "split", 0.25).unwrap();
        let side: SplitSidecar = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(side.window, win);
        let back = snapshot::load(&dir.path().join(side.h_file)).unwrap();
        assert_eq!(back.time, 0.25);
        assert!(hs_norm(&s.h, 0.0).is_finite());
    }
}
