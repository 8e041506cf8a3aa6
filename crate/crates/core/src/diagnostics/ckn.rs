use crate::error::{Error, Result};
use crate::field::ScalarSpectralField;
use crate::pressure::refinement;
use crate::sample::LocalLattice;
use crate::solver::Trajectory;

use super::cylinder::ParabolicCylinder;
use super::local::{check_pressures, sample_velocity, snapshots_in, state_at, trapezoid};

/// `r⁻² ∬_Q (|u|³ + |p - p̄_B(t)|^{3/2}) dx dt`, with `p̄_B(t)` the ball mean
/// of the pressure at each time.
///
/// Time nodes are the cylinder endpoints and every snapshot inside; fields
/// between snapshots are linear in time. The snapshot spacing over the
/// cylinder must not exceed `r²/8`.
pub fn ckn_quantity(traj: &Trajectory, pressures: &[ScalarSpectralField], cyl: &ParabolicCylinder) -> Result<f64> {
    check_pressures(traj, pressures)?;
    let g = *traj.grid();
    cyl.check_fits(&g)?;
    let r = cyl.radius;
    let (a, b) = (cyl.t_start(), cyl.center_t);
    traj.locate(a)?;
    traj.locate(b)?;
    let limit = r * r / 8.0;
    let spacing = covering_spacing(traj, a, b);
    if spacing > limit * (1.0 + 1e-9) {
        return Err(Error::InsufficientTemporalResolution { spacing, limit });
    }
    let ball = LocalLattice::ball(&g, cyl.center_x, r, refinement(&g, r, 8))?;
    let mut nodes = vec![a];
    nodes.extend(snapshots_in(traj, a, b).into_iter().map(|i| traj.times()[i]));
    if *nodes.last().unwrap() < b {
        nodes.push(b);
    }
    let mut values = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        let (u, p) = state_at(traj, Some(pressures), t)?;
        let p = p.expect("pressures supplied");
        let uv = sample_velocity(&ball, &u);
        let pv = &ball.sample(&[p.coeffs()])[0];
        let mean = pv.iter().sum::<f64>() / pv.len().max(1) as f64;
        let mut s = 0.0;
        for k in 0..ball.len() {
            let m2 = uv[0][k] * uv[0][k] + uv[1][k] * uv[1][k] + uv[2][k] * uv[2][k];
            s += m2 * m2.sqrt() + (pv[k] - mean).abs().powf(1.5);
        }
        values.push(s * ball.cell_volume());
    }
    Ok(trapezoid(&nodes, &values) / (r * r))
}

/// Largest gap between the snapshots that cover `[a, b]`.
fn covering_spacing(traj: &Trajectory, a: f64, b: f64) -> f64 {
    let times = traj.times();
    if times.len() < 2 {
        return if b > a { f64::INFINITY } else { 0.0 };
    }
    let lo = times.partition_point(|&t| t <= a).saturating_sub(1);
    let hi = times.partition_point(|&t| t < b).min(times.len() - 1);
    times[lo..=hi.max(lo)].windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{SpectralField, SpectralVelocity, ZERO};
    use crate::grid::Grid;
    use crate::pressure::pressure_from_velocity;
    use crate::solver::StepPolicy;
    use num_complex::Complex64;

    fn frozen(u: &SpectralVelocity, times: &[f64]) -> Trajectory {
        let mut tr = Trajectory::new(*u.grid(), StepPolicy::Prescribed);
        for &t in times {
            tr.push(t, u.clone()).unwrap();
        }
        tr
    }

    #[test]
    fn zero_field_gives_zero() {
        let g = Grid::periodic(16).unwrap();
        let z = SpectralVelocity::zeros(g);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.01).collect();
        let tr = frozen(&z, &times);
        let ps = vec![ScalarSpectralField::zeros(g); times.len()];
        let cyl = ParabolicCylinder::new([1.0; 3], 0.1, 0.3).unwrap();
        assert_eq!(ckn_quantity(&tr, &ps, &cyl).unwrap(), 0.0);
    }

    #[test]
    fn frozen_field_matches_single_slice_integral() {
        // u = (0, sin x, 0): frozen in time, so the time integral is r² times one slice
        let g = Grid::periodic(32).unwrap();
        let u = SpectralVelocity::from_modes(g, &[([1, 0, 0], [ZERO, Complex64::new(0.0, -0.5), ZERO])]).unwrap();
        let p = pressure_from_velocity(&u);
        let r = 0.6;
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.025).collect();
        let tr = frozen(&u, &times);
        let ps = vec![p.clone(); times.len()];
        let center = [0.7, 1.1, 2.0];
        let cyl = ParabolicCylinder::new(center, 0.5, r).unwrap();
        let got = ckn_quantity(&tr, &ps, &cyl).unwrap();
        // p vanishes for this shear flow; ∫_ball |sin x|³ by the same lattice
        assert!(crate::ops::hs_norm(&p, 0.0) < 1e-14);
        let ball = LocalLattice::ball(&g, center, r, refinement(&g, r, 8)).unwrap();
        let vals: Vec<f64> = ball.offsets().iter().map(|d| (center[0] + d[0]).sin().abs().powi(3)).collect();
        let want = ball.integrate(&vals);
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn coarse_snapshots_are_rejected() {
        let g = Grid::periodic(16).unwrap();
        let z = SpectralVelocity::zeros(g);
        let tr = frozen(&z, &[0.0, 0.5, 1.0]);
        let ps = vec![ScalarSpectralField::zeros(g); 3];
        let cyl = ParabolicCylinder::new([1.0; 3], 1.0, 0.5).unwrap();
        assert!(matches!(
            ckn_quantity(&tr, &ps, &cyl),
            Err(Error::InsufficientTemporalResolution { .. })
        ));
    }
}
