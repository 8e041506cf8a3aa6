//! Shared sampling helpers for the local diagnostics.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft;
use crate::field::{ScalarSpectralField, SpectralField, SpectralVelocity};
use crate::grid::Grid;
use crate::ops::partial;
use crate::sample::LocalLattice;
use crate::solver::Trajectory;

/// Velocity and pressure at time `t`, linear in time between snapshots.
pub(crate) fn state_at(
    traj: &Trajectory,
    pressures: Option<&[ScalarSpectralField]>,
    t: f64,
) -> Result<(SpectralVelocity, Option<ScalarSpectralField>)> {
    let (i, th) = traj.locate(t)?;
    let u = traj.interpolate(t)?;
    let p = match pressures {
        None => None,
        Some(ps) => {
            if th == 0.0 || i + 1 >= ps.len() {
                Some(ps[i].clone())
            } else {
                Some(ps[i].scaled(1.0 - th).add(&ps[i + 1].scaled(th))?)
            }
        }
    };
    Ok((u, p))
}

pub(crate) fn check_pressures(traj: &Trajectory, pressures: &[ScalarSpectralField]) -> Result<()> {
    if pressures.len() != traj.len() {
        return Err(invalid(format!(
            "pressure series has {} entries for {} snapshots",
            pressures.len(),
            traj.len()
        )));
    }
    for p in pressures {
        traj.grid().check_same(p.grid())?;
    }
    Ok(())
}

/// Velocity components at the lattice points.
pub(crate) fn sample_velocity(lat: &LocalLattice, u: &SpectralVelocity) -> Vec<Vec<f64>> {
    lat.sample(&[u.comp(0), u.comp(1), u.comp(2)])
}

/// `∂_j u_i` at the lattice points, indexed `[3 * i + j]`.
pub(crate) fn sample_gradient(lat: &LocalLattice, u: &SpectralVelocity) -> Vec<Vec<f64>> {
    let g = u.grid();
    let d: Vec<Vec<Complex64>> = (0..9).map(|k| partial(g, u.comp(k / 3), k % 3)).collect();
    let refs: Vec<&[Complex64]> = d.iter().map(|v| v.as_slice()).collect();
    lat.sample(&refs)
}

/// Nondecreasing axis tuples of length `order` with their multinomial
/// multiplicities; together they enumerate every ordered derivative.
fn derivative_classes(order: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(order);
    fn rec(order: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if cur.len() == order {
            let fact = |m: usize| (1..=m).product::<usize>() as f64;
            let counts: Vec<usize> = (0..3).map(|a| cur.iter().filter(|&&x| x == a).count()).collect();
            let w = fact(order) / counts.iter().map(|&c| fact(c)).product::<f64>();
            out.push((cur.clone(), w));
            return;
        }
        for a in from..3 {
            cur.push(a);
            rec(order, a, cur, out);
            cur.pop();
        }
    }
    rec(order, 0, &mut cur, &mut out);
    out
}

/// Coefficients of `∂^α u_c` for every derivative class, with weights.
fn derivative_coeffs(u: &SpectralVelocity, order: usize) -> Vec<(Vec<Complex64>, f64)> {
    let g = u.grid();
    let mut out = Vec::new();
    for (tuple, w) in derivative_classes(order) {
        for c in 0..3 {
            let mut d = u.comp(c).to_vec();
            for &a in &tuple {
                d = partial(g, &d, a);
            }
            out.push((d, w));
        }
    }
    out
}

pub(crate) const MAX_DERIVATIVE_ORDER: usize = 3;

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(invalid(format!(
            "derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    Ok(())
}

/// Lattice maximum of `|∇^l u|` (Frobenius norm over all ordered derivatives).
pub(crate) fn max_derivative_magnitude(u: &SpectralVelocity, order: usize) -> f64 {
    let g: Grid = *u.grid();
    let mut acc = vec![0.0; g.len()];
    let coeffs = derivative_coeffs(u, order);
    for pair in coeffs.chunks(2) {
        let (a, b) = fft::inverse_real_pair(g.n(), &pair[0].0, pair.get(1).map(|p| p.0.as_slice()), None);
        for (s, v) in acc.iter_mut().zip(&a) {
            *s += pair[0].1 * v * v;
        }
        if let Some(b) = b {
            for (s, v) in acc.iter_mut().zip(&b) {
                *s += pair[1].1 * v * v;
            }
        }
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

/// Maximum of `|∇^l u|` over the lattice points of `lat`.
pub(crate) fn local_max_derivative(lat: &LocalLattice, u: &SpectralVelocity, order: usize) -> f64 {
    let coeffs = derivative_coeffs(u, order);
    let refs: Vec<&[Complex64]> = coeffs.iter().map(|(c, _)| c.as_slice()).collect();
    let vals = lat.sample(&refs);
    let mut acc = vec![0.0; lat.len()];
    for ((_, w), v) in coeffs.iter().zip(&vals) {
        for (s, x) in acc.iter_mut().zip(v) {
            *s += w * x * x;
        }
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

/// Snapshot indices with time in `(a, b]`.
pub(crate) fn snapshots_in(traj: &Trajectory, a: f64, b: f64) -> Vec<usize> {
    let slack = 1e-12 * b.abs().max(1.0);
    traj.times()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > a + slack && t <= b + slack)
        .map(|(i, _)| i)
        .collect()
}

/// Trapezoid rule on arbitrary nodes.
pub(crate) fn trapezoid(times: &[f64], f: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(f.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Composite Simpson rule when the nodes are uniform and the interval count
/// is even; trapezoid otherwise.
pub(crate) fn simpson_or_trapezoid(times: &[f64], f: &[f64]) -> f64 {
    let m = times.len().saturating_sub(1);
    if m < 2 || m % 2 == 1 {
        return trapezoid(times, f);
    }
    let h = (times[m] - times[0]) / m as f64;
    let uniform = times
        .iter()
        .enumerate()
        .all(|(i, &t)| (t - (times[0] + i as f64 * h)).abs() <= 1e-9 * h);
    if !uniform {
        return trapezoid(times, f);
    }
    let mut s = f[0] + f[m];
    for (i, v) in f.iter().enumerate().take(m).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}
