//! Splitting `u₀ = a₀ + v₀` with `â₀ = φ û₀` for a smooth radial cutoff `φ`.
//!
//! The transition band of `φ` is placed in the gap between two consecutive
//! occupied shells of `u₀`, so `φ` is exactly 0 or 1 on every mode that
//! carries energy and the split reconstructs `u₀` bit for bit. The band is
//! chosen by bisection over the sorted shell radii.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{SpectralField, SpectralVelocity, ZERO};
use crate::ops::hs_norm;

/// `φ(ξ) = 1` for `|ξ| ≤ inner`, `0` for `|ξ| ≥ outer`, smooth in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl RadialCutoff {
    pub fn eval(&self, k: f64) -> f64 {
        smooth_step((k - self.inner) / (self.outer - self.inner))
    }
}

/// `1` on `x ≤ 0`, `0` on `x ≥ 1`, infinitely differentiable.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let f = |y: f64| (-1.0 / y).exp();
    f(1.0 - x) / (f(1.0 - x) + f(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalderonSplit {
    #[serde(skip)]
    pub a0: Option<SpectralVelocity>,
    #[serde(skip)]
    pub v0: Option<SpectralVelocity>,
    pub eta: f64,
    pub cutoff: RadialCutoff,
    pub u0_hhalf: f64,
    pub a0_hhalf: f64,
    pub v0_l2: f64,
    /// Occupied shells inside the cutoff.
    pub shells_kept: usize,
    pub shells_total: usize,
    /// `‖·‖_{Ḣ^{1/2}}` of the lowest occupied shell: the smallest nonzero
    /// value `‖a₀‖` can take.
    pub lowest_shell_hhalf: f64,
    pub bisection_steps: usize,
}

impl CalderonSplit {
    pub fn parts(&self) -> (&SpectralVelocity, &SpectralVelocity) {
        (
            self.a0.as_ref().expect("split fields present"),
            self.v0.as_ref().expect("split fields present"),
        )
    }
}

/// Largest shell-aligned low-pass `a₀` with `‖a₀‖_{Ḣ^{1/2}} < eta`.
///
/// When even the lowest occupied shell reaches `eta`, `a₀ = 0`.
pub fn calderon_split(u0: &SpectralVelocity, eta: f64) -> Result<CalderonSplit> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta must be positive and finite, got {eta}")));
    }
    let g = *u0.grid();
    let k0 = g.k0();
    let shells = g.shells();
    // Ḣ^{1/2} energy per occupied shell, sorted by shell index
    let mut energy: Vec<(usize, f64)> = Vec::new();
    {
        let mut per = std::collections::BTreeMap::new();
        for (idx, &q) in shells.iter().enumerate() {
            if q == 0 {
                continue;
            }
            let m = u0.mode(idx);
            let e: f64 = m.iter().map(|c| c.norm_sqr()).sum();
            if e > 0.0 {
                *per.entry(q).or_insert(0.0) += e * k0 * (q as f64).sqrt();
            }
        }
        energy.extend(per);
    }
    let vol = g.volume();
    let mut cum = Vec::with_capacity(energy.len());
    let mut acc = 0.0;
    for (_, e) in &energy {
        acc += e * vol;
        cum.push(acc.sqrt());
    }
    let radius = |j: usize| k0 * (energy[j].0 as f64).sqrt();

    // kept = number of shells retained; largest kept with cum[kept-1] < eta
    let (mut lo, mut hi) = (0usize, energy.len());
    let mut steps = 0;
    while lo < hi {
        steps += 1;
        let mid = (lo + hi).div_ceil(2);
        if cum[mid - 1] < eta {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let kept = lo;
    let cutoff = if energy.is_empty() {
        RadialCutoff { inner: k0, outer: 2.0 * k0 }
    } else if kept == energy.len() {
        let top = radius(kept - 1);
        RadialCutoff { inner: top, outer: top + k0 }
    } else if kept == 0 {
        let first = radius(0);
        RadialCutoff { inner: 0.5 * first, outer: first }
    } else {
        RadialCutoff {
            inner: radius(kept - 1),
            outer: radius(kept),
        }
    };

    let comps: [Vec<Complex64>; 3] = std::array::from_fn(|c| {
        let src = u0.comp(c);
        shells
            .iter()
            .zip(src)
            .map(|(&q, &v)| {
                if v == ZERO {
                    return ZERO;
                }
                let phi = cutoff.eval(k0 * (q as f64).sqrt());
                if phi == 1.0 {
                    v
                } else if phi == 0.0 {
                    ZERO
                } else {
                    v * phi
                }
            })
            .collect()
    });
    let a0 = SpectralVelocity::from_raw(g, comps);
    let v0 = u0.sub(&a0)?;
    Ok(CalderonSplit {
        eta,
        cutoff,
        u0_hhalf: hs_norm(u0, 0.5),
        a0_hhalf: hs_norm(&a0, 0.5),
        v0_l2: hs_norm(&v0, 0.0),
        shells_kept: kept,
        shells_total: energy.len(),
        lowest_shell_hhalf: cum.first().copied().unwrap_or(0.0),
        bisection_steps: steps,
        a0: Some(a0),
        v0: Some(v0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{make_initial_data, InitialDataSpec};
    use crate::field::SpectralField;
    use crate::grid::Grid;

    #[test]
    fn smooth_step_is_monotone_and_flat_at_the_ends() {
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = smooth_step(i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(smooth_step(0.0), 1.0);
        assert_eq!(smooth_step(1.0), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(smooth_step(1e-2), 1.0);
    }

    #[test]
    fn large_eta_keeps_everything() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::random(1.0, 1, -2.0), &g).unwrap();
        let s = calderon_split(&u, 2.0).unwrap();
        let (a, v) = s.parts();
        assert_eq!(a, &u);
        assert!(v.is_zero());
        assert_eq!(s.shells_kept, s.shells_total);
    }

    #[test]
    fn single_mode_below_its_norm_gives_zero_low_part() {
        let g = Grid::periodic(16).unwrap();
        let u = make_initial_data(&InitialDataSpec::beltrami(1.0), &g).unwrap();
        let n = hs_norm(&u, 0.5);
        let s = calderon_split(&u, 0.5 * n).unwrap();
        let (a, v) = s.parts();
        assert!(a.is_zero());
        assert_eq!(v, &u);
        assert!((s.lowest_shell_hhalf - n).abs() < 1e-12 * n);
    }

    #[test]
    fn broadband_split_is_exact_and_small() {
        let g = Grid::periodic(32).unwrap();
        for seed in 0..4 {
            let u = make_initial_data(&InitialDataSpec::random(1.0, seed, -1.0), &g).unwrap();
            let eta = 0.1 * hs_norm(&u, 0.5);
            let s = calderon_split(&u, eta).unwrap();
            let (a, v) = s.parts();
            assert!(s.a0_hhalf < eta);
            let back = a.add(v).unwrap();
            assert_eq!(&back, &u);
            assert!(s.v0_l2.is_finite());
            let wider = calderon_split(&u, s.a0_hhalf.max(s.lowest_shell_hhalf) * 1.5).unwrap();
            assert!(wider.shells_kept >= s.shells_kept);
        }
        assert!(calderon_split(&SpectralVelocity::zeros(g), 0.0).is_err());
    }
}
