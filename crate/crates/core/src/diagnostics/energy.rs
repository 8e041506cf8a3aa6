//! Local energy balance, initial-time energy balance and local energy norms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{ScalarSpectralField, SpectralField, SpectralVelocity};
use crate::grid::Grid;
use crate::pressure::refinement;
use crate::sample::LocalLattice;
use crate::solver::Trajectory;

use super::cylinder::{check_radius, TildeCylinder};
use super::local::{check_pressures, sample_gradient, sample_velocity, simpson_or_trapezoid, state_at, trapezoid};

/// Values of a test function and the derivatives the energy balance needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValues {
    pub phi: f64,
    pub phi_t: f64,
    pub grad: [f64; 3],
    pub lap: f64,
}

/// Nonnegative test function with compact support in space and time.
pub trait TestFunction: Sync {
    /// Center of the spatial support.
    fn center(&self) -> [f64; 3];
    /// Half width of a cube containing the spatial support.
    fn reach(&self) -> f64;
    /// Time interval outside which the function vanishes.
    fn time_support(&self) -> (f64, f64);
    /// Values at displacement `d` from the center and time `t`.
    fn eval(&self, d: [f64; 3], t: f64) -> PhiValues;
}

/// `φ(x, t) = Π_a b((x_a - c_a)/R) · b((t - t_c)/τ)` with `b(s) = (1 - s²)⁶`
/// on `|s| < 1`. The high power keeps `Δφ` smooth enough for lattice sums
/// to converge fast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFunction {
    pub center: [f64; 3],
    pub half_width: f64,
    pub t_center: f64,
    pub t_half: f64,
}

fn bump(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let q4 = q * q * q * q;
    (q4 * q * q, -12.0 * s * q4 * q, -12.0 * q4 * q + 120.0 * s * s * q4)
}

impl BumpTestFunction {
    pub fn new(center: [f64; 3], half_width: f64, t_center: f64, t_half: f64) -> Result<Self> {
        if !(half_width > 0.0 && t_half > 0.0 && half_width.is_finite() && t_half.is_finite()) {
            return Err(invalid("test function widths must be positive"));
        }
        Ok(Self {
            center,
            half_width,
            t_center,
            t_half,
        })
    }

    /// Spatial factor alone.
    pub fn spatial(&self, d: [f64; 3]) -> f64 {
        (0..3).map(|a| bump(d[a] / self.half_width).0).product()
    }
}

impl TestFunction for BumpTestFunction {
    fn center(&self) -> [f64; 3] {
        self.center
    }

    fn reach(&self) -> f64 {
        self.half_width
    }

    fn time_support(&self) -> (f64, f64) {
        (self.t_center - self.t_half, self.t_center + self.t_half)
    }

    fn eval(&self, d: [f64; 3], t: f64) -> PhiValues {
        let r = self.half_width;
        let b: [(f64, f64, f64); 3] = std::array::from_fn(|a| bump(d[a] / r));
        let (bt, dbt, _) = bump((t - self.t_center) / self.t_half);
        let prod = |skip: usize| (0..3).filter(|&a| a != skip).map(|a| b[a].0).product::<f64>();
        let space: f64 = b.iter().map(|v| v.0).product();
        let grad = std::array::from_fn(|a| b[a].1 / r * prod(a) * bt);
        let lap = (0..3).map(|a| b[a].2 / (r * r) * prod(a)).sum::<f64>() * bt;
        PhiValues {
            phi: space * bt,
            phi_t: space * dbt / self.t_half,
            grad,
            lap,
        }
    }
}

/// Terms of the local energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    /// Right side minus left side; zero for smooth solutions.
    pub residual: f64,
    /// `2 ∬ |∇u|² φ`, the natural scale of the residual.
    pub dissipation: f64,
    /// `∫ |u₀|² φ(x, 0)` (initial-time form only, else 0).
    pub initial: f64,
}

fn lattice_for(g: &Grid, phi: &dyn TestFunction) -> Result<LocalLattice> {
    let reach = phi.reach();
    check_radius(g, reach)?;
    LocalLattice::cube(g, phi.center(), reach, refinement(g, reach, 24))
}

/// Spatial integrals `(∫ |u|²(φ_t+Δφ) + (|u|²+2p) u·∇φ, ∫ 2|∇u|² φ)` at time `t`.
fn slice_terms(
    lat: &LocalLattice,
    phis: &[PhiValues],
    u: &SpectralVelocity,
    p: &ScalarSpectralField,
) -> (f64, f64) {
    if phis.iter().all(|v| v.phi == 0.0 && v.phi_t == 0.0 && v.lap == 0.0) {
        return (0.0, 0.0);
    }
    let uv = sample_velocity(lat, u);
    let gv = sample_gradient(lat, u);
    let pv = &lat.sample(&[p.coeffs()])[0];
    let (mut flux, mut diss) = (0.0, 0.0);
    for (k, ph) in phis.iter().enumerate() {
        let u2 = uv[0][k] * uv[0][k] + uv[1][k] * uv[1][k] + uv[2][k] * uv[2][k];
        let g2: f64 = gv.iter().map(|v| v[k] * v[k]).sum();
        let udphi = uv[0][k] * ph.grad[0] + uv[1][k] * ph.grad[1] + uv[2][k] * ph.grad[2];
        flux += u2 * (ph.phi_t + ph.lap) + (u2 + 2.0 * pv[k]) * udphi;
        diss += 2.0 * g2 * ph.phi;
    }
    let w = lat.cell_volume();
    (flux * w, diss * w)
}

fn phi_at(lat: &LocalLattice, phi: &dyn TestFunction, t: f64) -> Vec<PhiValues> {
    lat.offsets().iter().map(|d| phi.eval(*d, t)).collect()
}

/// Terms of `2∬|∇u|²φ ≤ ∬ |u|²(φ_t + Δφ) + (|u|² + 2p) u·∇φ` for a test
/// function supported inside the trajectory's time range.
pub fn local_energy_terms(
    traj: &Trajectory,
    pressures: &[ScalarSpectralField],
    phi: &dyn TestFunction,
) -> Result<EnergyBalance> {
    check_pressures(traj, pressures)?;
    let g = *traj.grid();
    let (lo, hi) = phi.time_support();
    let times = traj.times();
    let (start, end) = (times[0], traj.horizon());
    if lo < start || hi > end + 1e-12 * end.abs().max(1.0) {
        return Err(Error::TimeOutOfRange {
            t: if lo < start { lo } else { hi },
            start,
            end,
        });
    }
    let lat = lattice_for(&g, phi)?;
    let first = times.partition_point(|&t| t <= lo).saturating_sub(1);
    let last = times.partition_point(|&t| t < hi).min(times.len() - 1);
    let nodes = &times[first..=last];
    let mut flux = Vec::with_capacity(nodes.len());
    let mut diss = Vec::with_capacity(nodes.len());
    for (off, &t) in nodes.iter().enumerate() {
        let i = first + off;
        let (f, d) = if t <= lo || t >= hi {
            (0.0, 0.0)
        } else {
            slice_terms(&lat, &phi_at(&lat, phi, t), &traj.snapshots()[i], &pressures[i])
        };
        flux.push(f);
        diss.push(d);
    }
    let (f, d) = (trapezoid(nodes, &flux), trapezoid(nodes, &diss));
    Ok(EnergyBalance {
        residual: f - d,
        dissipation: d,
        initial: 0.0,
    })
}

/// Signed residual of the local energy inequality (right side minus left side).
pub fn local_energy_residual(
    traj: &Trajectory,
    pressures: &[ScalarSpectralField],
    phi: &dyn TestFunction,
) -> Result<f64> {
    Ok(local_energy_terms(traj, pressures, phi)?.residual)
}

/// Residual of the initial-time form
/// `∫|u₀|²φ(·,0) + ∬[|u|²(φ_t+Δφ) + (|u|²+2p)u·∇φ] - 2∬|∇u|²φ` over `t ≥ 0`,
/// for a test function that need not vanish at `t = 0`.
pub fn init_energy_residual(
    u0: &SpectralVelocity,
    traj: &Trajectory,
    pressures: &[ScalarSpectralField],
    phi: &dyn TestFunction,
) -> Result<EnergyBalance> {
    check_pressures(traj, pressures)?;
    let g = *traj.grid();
    g.check_same(u0.grid())?;
    let (_, hi) = phi.time_support();
    let times = traj.times();
    if times[0] != 0.0 {
        return Err(invalid("initial-time energy balance needs a trajectory starting at t = 0"));
    }
    let end = traj.horizon();
    if hi > end + 1e-12 * end.abs().max(1.0) {
        return Err(Error::TimeOutOfRange { t: hi, start: 0.0, end });
    }
    let lat = lattice_for(&g, phi)?;
    let last = times.partition_point(|&t| t < hi).min(times.len() - 1);
    // extend by one zero node when that makes the interval count even
    let last = if last % 2 == 1 && last + 1 < times.len() { last + 1 } else { last };
    let nodes = &times[..=last];
    let mut flux = Vec::with_capacity(nodes.len());
    let mut diss = Vec::with_capacity(nodes.len());
    for (i, &t) in nodes.iter().enumerate() {
        let (f, d) = if t >= hi {
            (0.0, 0.0)
        } else {
            slice_terms(&lat, &phi_at(&lat, phi, t), &traj.snapshots()[i], &pressures[i])
        };
        flux.push(f);
        diss.push(d);
    }
    let u0v = sample_velocity(&lat, u0);
    let initial = lat
        .offsets()
        .iter()
        .enumerate()
        .map(|(k, d)| (u0v[0][k].powi(2) + u0v[1][k].powi(2) + u0v[2][k].powi(2)) * phi.eval(*d, 0.0).phi)
        .sum::<f64>()
        * lat.cell_volume();
    let (f, d) = (simpson_or_trapezoid(nodes, &flux), simpson_or_trapezoid(nodes, &diss));
    Ok(EnergyBalance {
        residual: initial + f - d,
        dissipation: d,
        initial,
    })
}

/// `‖(u(t) - u₀) ψ‖_{L²}` at every snapshot, with `ψ` the spatial factor of
/// the bump.
pub fn local_l2_continuity(
    u0: &SpectralVelocity,
    traj: &Trajectory,
    psi: &BumpTestFunction,
) -> Result<Vec<(f64, f64)>> {
    let g = *traj.grid();
    g.check_same(u0.grid())?;
    let lat = lattice_for(&g, psi)?;
    let w: Vec<f64> = lat.offsets().iter().map(|d| psi.spatial(*d)).collect();
    let mut out = Vec::with_capacity(traj.len());
    for (t, u) in traj.times().iter().zip(traj.snapshots()) {
        let diff = u.sub(u0)?;
        let v = sample_velocity(&lat, &diff);
        let s: f64 = (0..lat.len())
            .map(|k| (v[0][k].powi(2) + v[1][k].powi(2) + v[2][k].powi(2)) * w[k] * w[k])
            .sum();
        out.push((*t, (s * lat.cell_volume()).sqrt()));
    }
    Ok(out)
}

/// Smooth a trajectory in time with `passes` applications of the `(1, 2, 1)/4`
/// filter at interior snapshots; the end snapshots are kept.
pub fn time_mollify(traj: &Trajectory, passes: usize) -> Result<Trajectory> {
    let mut snaps: Vec<SpectralVelocity> = traj.snapshots().to_vec();
    for _ in 0..passes {
        let prev = snaps.clone();
        for i in 1..prev.len().saturating_sub(1) {
            let mut v = prev[i].scaled(0.5);
            v.axpy(0.25, &prev[i - 1])?;
            v.axpy(0.25, &prev[i + 1])?;
            snaps[i] = v;
        }
    }
    let mut out = Trajectory::new(*traj.grid(), traj.policy());
    for (t, u) in traj.times().iter().zip(snaps) {
        out.push(*t, u)?;
    }
    Ok(out)
}

/// `‖u‖²_{L∞L²(Q̃)} + ‖∇u‖²_{L²L²(Q̃)}` on `Q̃ = B(x0, r) × (0, r²)`.
///
/// The supremum runs over snapshot times in `[0, r²]` plus the interpolated
/// state at `r²`; the gradient term uses the trapezoid rule on the same nodes.
pub fn local_energy_norm(traj: &Trajectory, tc: &TildeCylinder) -> Result<f64> {
    let g = *traj.grid();
    let r = tc.radius;
    check_radius(&g, r)?;
    let t_end = r * r;
    let horizon = traj.horizon();
    if t_end > horizon * (1.0 + 1e-12) {
        return Err(Error::HorizonTooShort { needed: t_end, horizon });
    }
    let ball = LocalLattice::ball(&g, tc.center_x, r, refinement(&g, r, 8))?;
    let w = ball.cell_volume();
    let times = traj.times();
    let mut nodes: Vec<f64> = times.iter().copied().filter(|&t| t < t_end).collect();
    nodes.push(t_end);
    let mut sup: f64 = 0.0;
    let mut grad = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        let (u, _) = state_at(traj, None, t)?;
        let uv = sample_velocity(&ball, &u);
        let gv = sample_gradient(&ball, &u);
        let l2: f64 = uv.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() * w;
        let g2: f64 = gv.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() * w;
        sup = sup.max(l2);
        grad.push(g2);
    }
    Ok(sup + trapezoid(&nodes, &grad))
}

/// One probe of `𝓔(Q̃)² / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub center_x: [f64; 3],
    pub radius: f64,
    pub energy_norm_sq: f64,
    pub ratio: f64,
}

/// Local energy norms over centers and radii, normalized by `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyScalingProbe {
    pub samples: Vec<ProbeSample>,
    pub max_ratio: f64,
    /// Radius at which the maximum is attained.
    pub argmax_radius: f64,
}

pub fn energy_scaling_probe(traj: &Trajectory, centers: &[[f64; 3]], radii: &[f64]) -> Result<EnergyScalingProbe> {
    use rayon::prelude::*;
    if centers.is_empty() || radii.is_empty() {
        return Err(invalid("energy probe needs at least one center and one radius"));
    }
    let jobs: Vec<([f64; 3], f64)> = centers
        .iter()
        .flat_map(|c| radii.iter().map(move |r| (*c, *r)))
        .collect();
    let samples: Vec<ProbeSample> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let e = local_energy_norm(traj, &TildeCylinder::new(c, r)?)?;
            Ok(ProbeSample {
                center_x: c,
                radius: r,
                energy_norm_sq: e,
                ratio: e / r,
            })
        })
        .collect::<Result<_>>()?;
    let best = samples
        .iter()
        .fold(&samples[0], |b, s| if s.ratio > b.ratio { s } else { b });
    Ok(EnergyScalingProbe {
        max_ratio: best.ratio,
        argmax_radius: best.radius,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ZERO;
    use crate::ops::hs_norm;
    use crate::solver::{heat_propagate, StepPolicy};
    use num_complex::Complex64;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let phi = BumpTestFunction::new([0.0; 3], 0.8, 0.5, 0.3).unwrap();
        let d = [0.1, -0.2, 0.3];
        let t = 0.45;
        let h = 1e-5;
        let v = phi.eval(d, t);
        let ft = (phi.eval(d, t + h).phi - phi.eval(d, t - h).phi) / (2.0 * h);
        assert!((ft - v.phi_t).abs() < 1e-8);
        let mut lap = 0.0;
        for a in 0..3 {
            let mut p = d;
            let mut m = d;
            p[a] += h;
            m[a] -= h;
            let (fp, fm) = (phi.eval(p, t).phi, phi.eval(m, t).phi);
            assert!(((fp - fm) / (2.0 * h) - v.grad[a]).abs() < 1e-8);
            lap += (fp - 2.0 * v.phi + fm) / (h * h);
        }
        assert!((lap - v.lap).abs() < 1e-4);
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let g = Grid::periodic(16).unwrap();
        let mut tr = Trajectory::new(g, StepPolicy::Prescribed);
        for i in 0..=10 {
            tr.push(i as f64 * 0.1, SpectralVelocity::zeros(g)).unwrap();
        }
        let ps = vec![ScalarSpectralField::zeros(g); 11];
        let phi = BumpTestFunction::new([1.0; 3], 1.0, 0.5, 0.3).unwrap();
        assert_eq!(local_energy_residual(&tr, &ps, &phi).unwrap(), 0.0);
        let late = BumpTestFunction::new([1.0; 3], 1.0, 0.9, 0.3).unwrap();
        assert!(local_energy_residual(&tr, &ps, &late).is_err());
    }

    #[test]
    fn mollifier_preserves_linear_in_time_fields() {
        let g = Grid::periodic(8).unwrap();
        let u = SpectralVelocity::from_modes(g, &[([1, 0, 0], [ZERO, Complex64::new(0.0, -0.5), ZERO])]).unwrap();
        let mut tr = Trajectory::new(g, StepPolicy::Prescribed);
        for i in 0..=6 {
            tr.push(i as f64 * 0.1, u.scaled(1.0 + i as f64)).unwrap();
        }
        let m = time_mollify(&tr, 3).unwrap();
        assert_eq!(m.times(), tr.times());
        for (a, b) in m.snapshots().iter().zip(tr.snapshots()) {
            assert!(hs_norm(&a.sub(b).unwrap(), 0.0) < 1e-14);
        }
    }

    #[test]
    fn frozen_field_energy_norm() {
        let g = Grid::periodic(32).unwrap();
        let u = SpectralVelocity::from_modes(g, &[([1, 0, 0], [ZERO, Complex64::new(0.0, -0.5), ZERO])]).unwrap();
        let mut tr = Trajectory::new(g, StepPolicy::Prescribed);
        for i in 0..=4 {
            tr.push(i as f64 * 0.25, u.clone()).unwrap();
        }
        let c = [0.4, 1.0, 2.0];
        let r = 0.9;
        let got = local_energy_norm(&tr, &TildeCylinder::new(c, r).unwrap()).unwrap();
        let ball = LocalLattice::ball(&g, c, r, refinement(&g, r, 8)).unwrap();
        let l2: f64 = ball.integrate(&ball.offsets().iter().map(|d| (c[0] + d[0]).sin().powi(2)).collect::<Vec<_>>());
        let g2: f64 = ball.integrate(&ball.offsets().iter().map(|d| (c[0] + d[0]).cos().powi(2)).collect::<Vec<_>>());
        let want = l2 + r * r * g2;
        assert!((got - want).abs() < 1e-12 * want);
        assert!(matches!(
            local_energy_norm(&tr, &TildeCylinder::new(c, 1.1).unwrap()),
            Err(Error::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn heat_flow_satisfies_the_local_balance_and_continuity() {
        // (0, sin x, 0) under the heat flow is an exact solution with zero pressure
        let g = Grid::periodic(16).unwrap();
        let u0 = SpectralVelocity::from_modes(g, &[([1, 0, 0], [ZERO, Complex64::new(0.0, -0.5), ZERO])]).unwrap();
        let mut tr = Trajectory::new(g, StepPolicy::Prescribed);
        for i in 0..=200 {
            let t = i as f64 * 0.005;
            tr.push(t, heat_propagate(&u0, t).unwrap()).unwrap();
        }
        let ps = vec![ScalarSpectralField::zeros(g); tr.len()];
        let phi = BumpTestFunction::new([1.2, 0.5, 0.0], 1.0, 0.5, 0.3).unwrap();
        let b = local_energy_terms(&tr, &ps, &phi).unwrap();
        assert!(b.residual.abs() < 1e-6 * b.dissipation, "{b:?}");
        let phi0 = BumpTestFunction::new([1.2, 0.5, 0.0], 1.0, 0.0, 0.4).unwrap();
        let b0 = init_energy_residual(&u0, &tr, &ps, &phi0).unwrap();
        assert!(b0.residual.abs() < 1e-6 * b0.initial, "{b0:?}");
        let cont = local_l2_continuity(&u0, &tr, &phi0).unwrap();
        assert_eq!(cont[0].1, 0.0);
        // Lipschitz in time: the ratio to t^{1/2} goes to zero
        let early: Vec<f64> = cont[1..4].iter().map(|(t, v)| v / t.sqrt()).collect();
        assert!(early[2] > early[1] && early[1] > early[0]);
        assert!(hs_norm(&u0, 0.0) > 0.0);
    }
}
