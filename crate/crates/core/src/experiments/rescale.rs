//! Scaling and translation of periodic data.
//!
//! `u ↦ λ u(λ x)` maps the mode `m` to `λ m` with amplitude `λ û(m)`. On a
//! box of fixed side the rescaled field holds `λ³` copies of the original
//! period, so its `Ḣ^{1/2}` norm is `λ^{3/2}` times the original; per period
//! the norm is unchanged. The rescaled field lives on a grid with `λ n`
//! modes per axis.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{SpectralField, SpectralVelocity, ZERO};
use crate::grid::Grid;

fn integer_factor(lam: f64) -> Result<usize> {
    if !(lam.is_finite() && lam >= 1.0 && lam.fract() == 0.0) {
        return Err(invalid(format!("scaling factor must be a positive integer, got {lam}")));
    }
    Ok(lam as usize)
}

/// `λ u₀(λ x)` on a grid with `λ n` modes per axis (same box).
pub fn rescale_data(u0: &SpectralVelocity, lam: f64) -> Result<SpectralVelocity> {
    let lam_i = integer_factor(lam)?;
    let g = *u0.grid();
    if lam_i == 1 {
        return Ok(u0.clone());
    }
    let fine = g.with_modes(g.n() * lam_i)?;
    let n = g.n();
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; fine.len()]);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                let dst = fine.index(
                    fine.unsigned(g.signed(i) * lam_i as i64),
                    fine.unsigned(g.signed(j) * lam_i as i64),
                    fine.unsigned(g.signed(l) * lam_i as i64),
                );
                for c in 0..3 {
                    comps[c][dst] = u0.comp(c)[idx] * lam;
                }
            }
        }
    }
    SpectralVelocity::from_components(fine, comps)
}

/// `u₀(x - x₀)`: multiply every mode by `e^{-ik·x₀}`.
pub fn translate_data(u0: &SpectralVelocity, shift: [f64; 3]) -> SpectralVelocity {
    let g = *u0.grid();
    let k = g.wavenumbers();
    let n = g.n();
    let phase: [Vec<Complex64>; 3] =
        std::array::from_fn(|a| k.iter().map(|&kk| Complex64::from_polar(1.0, -kk * shift[a])).collect());
    let mut out = u0.clone();
    for comp in out.components_mut() {
        for i in 0..n {
            for j in 0..n {
                let pij = phase[0][i] * phase[1][j];
                for l in 0..n {
                    let idx = g.index(i, j, l);
                    if comp[idx] != ZERO {
                        comp[idx] *= pij * phase[2][l];
                    }
                }
            }
        }
    }
    out.canonicalized()
}

/// Copy the modes representable on `target` (same box); the rest are dropped.
pub fn resample(u: &SpectralVelocity, target: &Grid) -> SpectralVelocity {
    let g = *u.grid();
    let half = (target.n().min(g.n()) / 2) as i64;
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; target.len()]);
    let n = g.n();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let m = [g.signed(i), g.signed(j), g.signed(l)];
                if m.iter().any(|s| s.abs() >= half) {
                    continue;
                }
                let src = g.index(i, j, l);
                let dst = target.index(target.unsigned(m[0]), target.unsigned(m[1]), target.unsigned(m[2]));
                for c in 0..3 {
                    comps[c][dst] = u.comp(c)[src];
                }
            }
        }
    }
    SpectralVelocity::from_components(*target, comps).expect("lengths match the target grid")
}
