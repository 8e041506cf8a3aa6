use std::path::PathBuf;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{PhysicalField, SpectralField, SpectralVelocity, ScalarSpectralField, ZERO};
use crate::grid::Grid;
use crate::ops::{curl, hs_norm, leray_project};
use crate::snapshot;

use super::rescale::{resample, translate_data};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TaylorGreen,
    Beltrami,
    RandomDivfree,
    LocalizedBump,
    FromFile,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "taylor_green" => Family::TaylorGreen,
            "beltrami" => Family::Beltrami,
            "random_divfree" => Family::RandomDivfree,
            "localized_bump" => Family::LocalizedBump,
            "from_file" => Family::FromFile,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::TaylorGreen => "taylor_green",
            Family::Beltrami => "beltrami",
            Family::RandomDivfree => "random_divfree",
            Family::LocalizedBump => "localized_bump",
            Family::FromFile => "from_file",
        }
    }
}

/// Recipe for an initial velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub family: Family,
    /// Taylor–Green and Beltrami: velocity amplitude. Random: target
    /// `‖u‖_{Ḣ^{1/2}}`. Bump: `max|u|`. File: multiplier.
    pub amplitude: f64,
    pub seed: u64,
    pub spectrum_slope: f64,
    /// Translation applied after construction.
    pub offset: [f64; 3],
    /// Ring radius of the localized bump (default `L/6`).
    pub ring_radius: Option<f64>,
    /// Core radius of the localized bump (default `L/10`).
    pub core_radius: Option<f64>,
    pub path: Option<PathBuf>,
}

impl InitialDataSpec {
    pub fn new(family: Family, amplitude: f64) -> Self {
        Self {
            family,
            amplitude,
            seed: 0,
            spectrum_slope: -2.0,
            offset: [0.0; 3],
            ring_radius: None,
            core_radius: None,
            path: None,
        }
    }

    pub fn taylor_green(amplitude: f64) -> Self {
        Self::new(Family::TaylorGreen, amplitude)
    }

    pub fn beltrami(amplitude: f64) -> Self {
        Self::new(Family::Beltrami, amplitude)
    }

    pub fn random(amplitude: f64, seed: u64, slope: f64) -> Self {
        Self {
            seed,
            spectrum_slope: slope,
            ..Self::new(Family::RandomDivfree, amplitude)
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }
}

/// Realize an initial-data recipe on a grid. The result is divergence-free,
/// zero-mean and Hermitian.
pub fn make_initial_data(spec: &InitialDataSpec, grid: &Grid) -> Result<SpectralVelocity> {
    if !spec.amplitude.is_finite() {
        return Err(invalid("amplitude must be finite"));
    }
    let g = *grid;
    let k0 = g.k0();
    let a = spec.amplitude;
    let u = match spec.family {
        Family::TaylorGreen => {
            let f = PhysicalField::from_fn(g, |[x, y, z]| {
                let (x, y, z) = (k0 * x, k0 * y, k0 * z);
                [
                    a * x.cos() * y.sin() * z.sin(),
                    -a * x.sin() * y.cos() * z.sin(),
                    0.0,
                ]
            })?;
            SpectralVelocity::from_physical(&f)?
        }
        Family::Beltrami => {
            let f = PhysicalField::from_fn(g, |[x, y, z]| {
                let (x, y, z) = (k0 * x, k0 * y, k0 * z);
                [a * (z.sin() + y.cos()), a * (x.sin() + z.cos()), a * (y.sin() + x.cos())]
            })?;
            SpectralVelocity::from_physical(&f)?
        }
        Family::RandomDivfree => random_divfree(&g, a, spec.seed, spec.spectrum_slope)?,
        Family::LocalizedBump => localized_bump(&g, spec)?,
        Family::FromFile => {
            let path = spec
                .path
                .as_ref()
                .ok_or_else(|| invalid("from_file family needs a path"))?;
            let (_, u) = snapshot::load(path)?.into_velocity()?;
            if u.grid().box_length() != g.box_length() {
                return Err(invalid("snapshot box length differs from the grid"));
            }
            resample(&u, &g).scaled(a)
        }
    };
    let u = leray_project(&u).canonicalized();
    if spec.offset == [0.0; 3] {
        Ok(u)
    } else {
        Ok(translate_data(&u, spec.offset))
    }
}

fn random_divfree(g: &Grid, amplitude: f64, seed: u64, slope: f64) -> Result<SpectralVelocity> {
    if !slope.is_finite() {
        return Err(invalid("spectrum slope must be finite"));
    }
    if amplitude < 0.0 {
        return Err(invalid("random family needs a nonnegative amplitude"));
    }
    // Leave the top third of the retained band empty so the data starts resolved.
    let reach = (2 * g.cutoff()) / 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; g.len()]);
    for idx in 0..g.len() {
        let (i, j, l) = g.unindex(idx);
        let draws: [f64; 6] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let m = [g.signed(i), g.signed(j), g.signed(l)];
        if m.iter().any(|v| v.abs() > reach) || g.is_nyquist(i) || g.is_nyquist(j) || g.is_nyquist(l) {
            continue;
        }
        let q = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        if q == 0.0 {
            continue;
        }
        let shape = (g.k0() * q.sqrt()).powf(slope);
        for c in 0..3 {
            comps[c][idx] = Complex64::new(draws[2 * c], draws[2 * c + 1]) * shape;
        }
    }
    let u = leray_project(&SpectralVelocity::from_components(*g, comps)?);
    let norm = hs_norm(&u, 0.5);
    if norm == 0.0 {
        return Ok(u);
    }
    Ok(u.scaled(amplitude / norm))
}

/// Vortex ring: `u = curl(ψ e_θ)` with `ψ` a smooth bump of the distance to
/// the core circle, centered at the box center, scaled to `max|u| = amplitude`.
fn localized_bump(g: &Grid, spec: &InitialDataSpec) -> Result<SpectralVelocity> {
    let l = g.box_length();
    let ring = spec.ring_radius.unwrap_or(l / 6.0);
    let core = spec.core_radius.unwrap_or(l / 10.0);
    if !(ring > 0.0 && core > 0.0 && core < ring && ring + core < 0.5 * l) {
        return Err(invalid(format!(
            "localized bump needs 0 < core < ring and ring + core < L/2 (ring {ring}, core {core})"
        )));
    }
    let c = 0.5 * l;
    let bump = |d: f64| {
        let s = d / core;
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    };
    let potential = PhysicalField::from_fn(*g, |[x, y, z]| {
        let (dx, dy, dz) = (g.periodic_delta(x, c), g.periodic_delta(y, c), g.periodic_delta(z, c));
        let rho = (dx * dx + dy * dy).sqrt();
        if rho == 0.0 {
            return [0.0; 3];
        }
        let d = ((rho - ring).powi(2) + dz * dz).sqrt();
        let psi = bump(d);
        [-psi * dy / rho, psi * dx / rho, 0.0]
    })?;
    let comps: [ScalarSpectralField; 3] = std::array::from_fn(|k| {
        ScalarSpectralField::from_physical(&PhysicalField::scalar(*g, potential.component(k).to_vec()).unwrap())
            .unwrap()
    });
    let a = SpectralVelocity::from_components(*g, std::array::from_fn(|k| comps[k].coeffs().to_vec()))?;
    let u = curl(&a);
    let peak = u.to_physical().max_magnitude();
    if peak == 0.0 {
        return Err(invalid("localized bump is not resolved on this grid"));
    }
    Ok(u.scaled(spec.amplitude / peak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::divergence;

    #[test]
    fn taylor_green_is_divergence_free_three_mode_field() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::taylor_green(1.0), &g).unwrap();
        assert!(u.divergence_ratio() < 1e-14);
        // û_x(±1,±1,±1) has magnitude 1/8
        let c = u.mode_at([1, 1, 1])[0];
        assert!((c.norm() - 0.125).abs() < 1e-15);
        let div = divergence(&u);
        assert!(crate::ops::hs_norm(&div, 0.0) < 1e-13);
    }

    #[test]
    fn beltrami_is_curl_eigenfield() {
        let g = Grid::new(16, 3.0).unwrap();
        let u = make_initial_data(&InitialDataSpec::beltrami(0.7), &g).unwrap();
        let w = curl(&u);
        for idx in 0..g.len() {
            for c in 0..3 {
                assert!((w.mode(idx)[c] - u.mode(idx)[c] * g.k0()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn random_family_is_deterministic_and_normalized() {
        let g = Grid::periodic(16).unwrap();
        let spec = InitialDataSpec::random(0.3, 42, -1.5);
        let a = make_initial_data(&spec, &g).unwrap();
        let b = make_initial_data(&spec, &g).unwrap();
        assert_eq!(a, b);
        assert!((hs_norm(&a, 0.5) - 0.3).abs() < 1e-14);
        assert!(a.divergence_ratio() < 1e-14);
        assert_eq!(crate::ops::tail_fraction(&a), 0.0);
        let c = make_initial_data(&InitialDataSpec::random(0.3, 43, -1.5), &g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bump_is_scaled_to_peak_speed() {
        let g = Grid::periodic(32).unwrap();
        let mut spec = InitialDataSpec::new(Family::LocalizedBump, 0.5);
        spec.offset = [0.3, 0.0, 0.0];
        let u = make_initial_data(&spec, &g).unwrap();
        assert!((u.to_physical().max_magnitude() - 0.5).abs() < 0.05);
        assert!(u.divergence_ratio() < 1e-13);
    }
}
