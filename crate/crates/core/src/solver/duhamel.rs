//! Quadrature for `∫₀ᵗ S(t-s) F(s) ds` with `F` sampled on a time lattice.
//!
//! The substitution `s = t - τ²` turns the kernel `e^{-|k|²(t-s)}` into the
//! smooth integrand `2τ e^{-|k|²τ²} F(t-τ²)` on a uniform `τ`-lattice. `F`
//! between nodes is the cubic Lagrange interpolant built from nodes in
//! `[0, t]`. The trapezoid sum carries the first Euler–Maclaurin endpoint
//! correction. Weights depend on `k` only through the integer shell
//! `|m̃|²`, so they are tabulated per shell.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{SpectralField, SpectralVelocity, ZERO};
use crate::grid::Grid;
use crate::ops::nonlinear_term;

use super::trajectory::Trajectory;

pub const DEFAULT_QUAD_POINTS: usize = 512;

/// Lagrange basis values and derivatives at `s` for the given nodes.
fn lagrange(nodes: &[f64], s: f64) -> (Vec<f64>, Vec<f64>) {
    let k = nodes.len();
    let mut val = vec![0.0; k];
    let mut der = vec![0.0; k];
    for m in 0..k {
        let mut p = 1.0;
        let mut dp = 0.0;
        for j in 0..k {
            if j == m {
                continue;
            }
            let denom = nodes[m] - nodes[j];
            let f = (s - nodes[j]) / denom;
            dp = dp * f + p / denom;
            p *= f;
        }
        val[m] = p;
        der[m] = dp;
    }
    (val, der)
}

/// Interpolation stencil (first node and count) covering `s`, using nodes
/// `0..=last` only.
fn stencil(times: &[f64], last: usize, s: f64) -> (usize, usize) {
    let count = (last + 1).min(4);
    let p = times[..=last].partition_point(|&x| x <= s).clamp(1, last.max(1)) - 1;
    let start = p.saturating_sub(1).min(last + 1 - count);
    (start, count)
}

/// Weights `W[m][q]` with `∫₀ᵗ e^{-k0² q (t-s)} F(s) ds ≈ Σ_m W[m][q] F(t_m)`.
pub(crate) fn weights(times: &[f64], t: f64, k0sq: f64, max_shell: usize, quad: usize) -> Result<Vec<Vec<f64>>> {
    if quad < 2 {
        return Err(invalid("Duhamel quadrature needs at least 2 points"));
    }
    let end = *times.last().ok_or_else(|| invalid("empty time lattice"))?;
    let slack = 1e-12 * end.abs().max(1.0);
    if !(t >= -slack && t <= end + slack) {
        return Err(Error::TimeOutOfRange { t, start: times[0], end });
    }
    let last = times.partition_point(|&x| x < t - slack).min(times.len() - 1);
    let mut w = vec![vec![0.0; max_shell + 1]; last + 1];
    if t <= slack {
        return Ok(w);
    }
    let b = t.sqrt();
    let dtau = b / quad as f64;
    let kappa: Vec<f64> = (0..=max_shell).map(|q| k0sq * q as f64).collect();
    for j in 1..=quad {
        let tau = j as f64 * dtau;
        let s = (t - tau * tau).max(0.0);
        let (start, count) = stencil(times, last, s);
        let (l, _) = lagrange(&times[start..start + count], s);
        let omega = if j == quad { 0.5 } else { 1.0 } * dtau * 2.0 * tau;
        for (q, &kq) in kappa.iter().enumerate() {
            let e = omega * (-kq * tau * tau).exp();
            for (m, lm) in l.iter().enumerate() {
                w[start + m][q] += e * lm;
            }
        }
    }
    // Euler–Maclaurin: ∫ ≈ T - h²/12 (f'(b) - f'(0)), with f(τ) = 2τ e^{-κτ²} ℓ(t-τ²).
    let c = dtau * dtau / 12.0;
    {
        let (start, count) = stencil(times, last, t);
        let (l, _) = lagrange(&times[start..start + count], t);
        for (m, lm) in l.iter().enumerate() {
            for q in 0..=max_shell {
                w[start + m][q] += c * 2.0 * lm;
            }
        }
    }
    {
        let (start, count) = stencil(times, last, 0.0);
        let (l, dl) = lagrange(&times[start..start + count], 0.0);
        for (q, &kq) in kappa.iter().enumerate() {
            let e = (-kq * t).exp();
            for m in 0..count {
                let fb = e * (2.0 * l[m] * (1.0 - 2.0 * kq * t) - 4.0 * t * dl[m]);
                w[start + m][q] -= c * fb;
            }
        }
    }
    Ok(w)
}

/// `Σ_m W[m][q(k)] F_m(k)` over the supplied forcing samples.
pub(crate) fn apply_weights(g: &Grid, shells: &[u32], w: &[Vec<f64>], forcing: &[&SpectralVelocity]) -> SpectralVelocity {
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; g.len()]);
    for (wm, f) in w.iter().zip(forcing) {
        if f.is_zero() {
            continue;
        }
        for (c, out) in comps.iter_mut().enumerate() {
            let src = f.comp(c);
            for ((o, v), &q) in out.iter_mut().zip(src).zip(shells) {
                if *v != ZERO {
                    *o += v * wm[q as usize];
                }
            }
        }
    }
    SpectralVelocity::from_raw(*g, comps)
}

/// `∫₀ᵗ S(t-s) F(s) ds` for forcing samples `F(times[m])`.
pub fn duhamel_integral(times: &[f64], forcing: &[SpectralVelocity], t: f64) -> Result<SpectralVelocity> {
    duhamel_integral_with(times, forcing, t, DEFAULT_QUAD_POINTS)
}

pub fn duhamel_integral_with(
    times: &[f64],
    forcing: &[SpectralVelocity],
    t: f64,
    quad: usize,
) -> Result<SpectralVelocity> {
    if times.len() != forcing.len() || times.is_empty() {
        return Err(invalid("forcing samples must match the time lattice"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("time lattice must increase strictly"));
    }
    let g = *forcing[0].grid();
    for f in forcing {
        g.check_same(f.grid())?;
    }
    let max_shell = 3 * (g.n() / 2) * (g.n() / 2);
    let w = weights(times, t, g.k0() * g.k0(), max_shell, quad)?;
    let shells: Vec<u32> = g.shells().into_iter().map(|q| q as u32).collect();
    let refs: Vec<&SpectralVelocity> = forcing.iter().collect();
    Ok(apply_weights(&g, &shells, &w, &refs[..w.len()]))
}

/// `B(u, v)(t) = -∫₀ᵗ S(t-s) P∇·(u⊗v)(s) ds` with `f_ij = -u_i v_j`.
pub fn duhamel_bilinear(u: &Trajectory, v: &Trajectory, t: f64) -> Result<SpectralVelocity> {
    duhamel_bilinear_with(u, v, t, DEFAULT_QUAD_POINTS)
}

pub fn duhamel_bilinear_with(u: &Trajectory, v: &Trajectory, t: f64, quad: usize) -> Result<SpectralVelocity> {
    u.grid().check_same(v.grid())?;
    if u.times() != v.times() {
        return Err(Error::TimeLatticeMismatch);
    }
    let times = u.times();
    let end = u.horizon();
    if !(t >= 0.0 && t <= end + 1e-12 * end.abs().max(1.0)) {
        return Err(Error::TimeOutOfRange { t, start: 0.0, end });
    }
    let last = times.partition_point(|&x| x < t - 1e-12 * end.abs().max(1.0)).min(times.len() - 1);
    let mut forcing = Vec::with_capacity(last + 1);
    for m in 0..=last {
        let nt = nonlinear_term(&u.snapshots()[m], &v.snapshots()[m])?;
        forcing.push(crate::ops::leray_project(&nt).scaled(-1.0));
    }
    duhamel_integral_with(&times[..=last], &forcing, t, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_cubics() {
        let nodes = [0.0, 0.3, 0.7, 1.0];
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let df = |x: f64| -2.0 + 1.5 * x * x;
        let s = 0.45;
        let (l, dl) = lagrange(&nodes, s);
        let v: f64 = l.iter().zip(&nodes).map(|(a, x)| a * f(*x)).sum();
        let d: f64 = dl.iter().zip(&nodes).map(|(a, x)| a * f(*x)).sum();
        assert!((v - f(s)).abs() < 1e-14);
        assert!((d - df(s)).abs() < 1e-13);
    }

    #[test]
    fn frozen_forcing_matches_exponential_integral() {
        let times: Vec<f64> = (0..=8).map(|j| j as f64 * 0.05).collect();
        let t = 0.4;
        let w = weights(&times, t, 1.0, 300, DEFAULT_QUAD_POINTS).unwrap();
        for q in [0usize, 1, 3, 12, 75, 300] {
            let sum: f64 = w.iter().map(|wm| wm[q]).sum();
            let k2 = q as f64;
            let exact = if q == 0 { t } else { (1.0 - (-k2 * t).exp()) / k2 };
            assert!((sum - exact).abs() < 1e-8 * exact, "q={q}: {sum} vs {exact}");
        }
    }

    #[test]
    fn linear_in_time_forcing_is_integrated_exactly() {
        // F(s) = s: ∫₀ᵗ e^{-κ(t-s)} s ds = t/κ - (1 - e^{-κt})/κ²
        let times: Vec<f64> = (0..=5).map(|j| j as f64 * 0.1).collect();
        let t = 0.5;
        let w = weights(&times, t, 1.0, 50, DEFAULT_QUAD_POINTS).unwrap();
        for q in [1usize, 7, 50] {
            let k = q as f64;
            let got: f64 = w.iter().zip(&times).map(|(wm, s)| wm[q] * s).sum();
            let exact = t / k - (1.0 - (-k * t).exp()) / (k * k);
            assert!((got - exact).abs() < 1e-9 * exact.abs(), "q={q}");
        }
    }
}
