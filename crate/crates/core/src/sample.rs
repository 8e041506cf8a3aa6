//! Evaluation of spectral fields on local lattices.
//!
//! Local diagnostics integrate over balls and cubes with lattice quadrature.
//! The quadrature lattice is the collocation lattice refined by an integer
//! factor; values come from separable evaluation of the trigonometric
//! interpolant, which coincides with the collocation values when the
//! refinement factor is 1.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::ZERO;
use crate::grid::Grid;

/// Lattice points of a ball or cube around a center, with uniform weights.
#[derive(Debug, Clone)]
pub struct LocalLattice {
    grid: Grid,
    center: [f64; 3],
    spacing: f64,
    axes: [Vec<f64>; 3],
    members: Vec<usize>,
    offsets: Vec<[f64; 3]>,
}

impl LocalLattice {
    /// Points `j·h` (`h = dx / refine`) with `|x - center| < radius`.
    pub fn ball(grid: &Grid, center: [f64; 3], radius: f64, refine: usize) -> Result<Self> {
        Self::build(grid, center, radius, refine, |d| {
            d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < radius * radius
        })
    }

    /// Points with `max_i |x_i - center_i| < half_width`.
    pub fn cube(grid: &Grid, center: [f64; 3], half_width: f64, refine: usize) -> Result<Self> {
        Self::build(grid, center, half_width, refine, |d| {
            d.iter().all(|v| v.abs() < half_width)
        })
    }

    fn build(
        grid: &Grid,
        center: [f64; 3],
        reach: f64,
        refine: usize,
        inside: impl Fn([f64; 3]) -> bool,
    ) -> Result<Self> {
        if refine == 0 {
            return Err(invalid("quadrature refinement must be >= 1"));
        }
        if !(reach.is_finite() && reach > 0.0) {
            return Err(invalid(format!("local lattice needs a positive radius, got {reach}")));
        }
        if reach >= 0.5 * grid.box_length() {
            return Err(invalid("local lattice wider than the periodic box"));
        }
        let h = grid.dx() / refine as f64;
        let axes: [Vec<f64>; 3] = std::array::from_fn(|a| {
            let lo = ((center[a] - reach) / h).ceil() as i64;
            let hi = ((center[a] + reach) / h).floor() as i64;
            (lo..=hi).map(|j| j as f64 * h).collect()
        });
        let (ny, nz) = (axes[1].len(), axes[2].len());
        let mut members = Vec::new();
        let mut offsets = Vec::new();
        for (a, x) in axes[0].iter().enumerate() {
            for (b, y) in axes[1].iter().enumerate() {
                for (c, z) in axes[2].iter().enumerate() {
                    let d = [x - center[0], y - center[1], z - center[2]];
                    if inside(d) {
                        members.push((a * ny + b) * nz + c);
                        offsets.push(d);
                    }
                }
            }
        }
        Ok(Self {
            grid: *grid,
            center,
            spacing: h,
            axes,
            members,
            offsets,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Quadrature weight of each point.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Displacements of the member points from the center.
    pub fn offsets(&self) -> &[[f64; 3]] {
        &self.offsets
    }

    /// Values of each spectral component at the member points.
    pub fn sample(&self, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let tensor = TensorSampler::new(&self.grid, &self.axes);
        comps
            .iter()
            .map(|c| {
                let full = tensor.evaluate(c);
                self.members.iter().map(|&m| full[m]).collect()
            })
            .collect()
    }

    /// Lattice sum `Σ f(x_p) h³`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }
}

/// Separable evaluation of `Σ_k f̂(k) e^{ik·x}` on a tensor lattice.
pub(crate) struct TensorSampler {
    n: usize,
    k0: f64,
    axes: [Vec<f64>; 3],
}

impl TensorSampler {
    pub(crate) fn new(grid: &Grid, axes: &[Vec<f64>; 3]) -> Self {
        Self {
            n: grid.n(),
            k0: grid.k0(),
            axes: axes.clone(),
        }
    }

    pub(crate) fn evaluate(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let signed = |m: usize| if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
        let mut reach = 0i64;
        for (idx, v) in coeffs.iter().enumerate() {
            if *v != ZERO {
                let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
                reach = reach
                    .max(signed(i).abs())
                    .max(signed(j).abs())
                    .max(signed(l).abs());
            }
        }
        let (nx, ny, nz) = (self.axes[0].len(), self.axes[1].len(), self.axes[2].len());
        if coeffs.iter().all(|v| *v == ZERO) {
            return vec![0.0; nx * ny * nz];
        }
        let kk = (2 * reach + 1) as usize;
        let modes: Vec<i64> = (-reach..=reach).collect();
        let unsigned = |s: i64| s.rem_euclid(n as i64) as usize;
        let phase = |axis: usize| -> Vec<Complex64> {
            let xs = &self.axes[axis];
            let mut e = Vec::with_capacity(kk * xs.len());
            for &m in &modes {
                for &x in xs {
                    e.push(Complex64::from_polar(1.0, self.k0 * m as f64 * x));
                }
            }
            e
        };
        let (ex, ey, ez) = (phase(0), phase(1), phase(2));

        // t1[a][b][z] = Σ_d C[a][b][d] e^{ik_d z}
        let mut t1 = vec![ZERO; kk * kk * nz];
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                let out = &mut t1[(a * kk + b) * nz..(a * kk + b + 1) * nz];
                for (d, &md) in modes.iter().enumerate() {
                    let v = coeffs[(unsigned(ma) * n + unsigned(mb)) * n + unsigned(md)];
                    if v == ZERO {
                        continue;
                    }
                    let row = &ez[d * nz..(d + 1) * nz];
                    for (o, e) in out.iter_mut().zip(row) {
                        *o += v * e;
                    }
                }
            }
        }
        // t2[a][y][z] = Σ_b t1[a][b][z] e^{ik_b y}
        let mut t2 = vec![ZERO; kk * ny * nz];
        for a in 0..kk {
            for b in 0..kk {
                let src = &t1[(a * kk + b) * nz..(a * kk + b + 1) * nz];
                if src.iter().all(|v| *v == ZERO) {
                    continue;
                }
                for y in 0..ny {
                    let e = ey[b * ny + y];
                    let out = &mut t2[(a * ny + y) * nz..(a * ny + y + 1) * nz];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += s * e;
                    }
                }
            }
        }
        // out[x][y][z] = Re Σ_a t2[a][y][z] e^{ik_a x}
        let plane = ny * nz;
        let mut out = vec![0.0; nx * plane];
        for a in 0..kk {
            let src = &t2[a * plane..(a + 1) * plane];
            for x in 0..nx {
                let e = ex[a * nx + x];
                let dst = &mut out[x * plane..(x + 1) * plane];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += s.re * e.re - s.im * e.im;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{SpectralField, SpectralVelocity};

    #[test]
    fn refine_one_matches_collocation_values() {
        let g = crate::grid::Grid::periodic(16).unwrap();
        let u = SpectralVelocity::from_modes(
            g,
            &[
                ([1, 2, 0], [Complex64::new(0.3, 0.1), ZERO, ZERO]),
                ([0, 1, 3], [ZERO, Complex64::new(0.0, 0.2), ZERO]),
            ],
        )
        .unwrap();
        let p = u.to_physical();
        let center = [g.coord(3), g.coord(5), g.coord(7)];
        let ball = LocalLattice::ball(&g, center, 0.9, 1).unwrap();
        let vals = ball.sample(&[u.comp(0), u.comp(1)]);
        for (k, d) in ball.offsets().iter().enumerate() {
            let idx: Vec<usize> = (0..3)
                .map(|a| (((center[a] + d[a]) / g.dx()).round() as i64).rem_euclid(16) as usize)
                .collect();
            let flat = g.index(idx[0], idx[1], idx[2]);
            assert!((vals[0][k] - p.component(0)[flat]).abs() < 1e-13);
            assert!((vals[1][k] - p.component(1)[flat]).abs() < 1e-13);
        }
    }

    #[test]
    fn ball_volume_converges_with_refinement() {
        let g = crate::grid::Grid::periodic(32).unwrap();
        let r = 1.0;
        let exact = 4.0 / 3.0 * std::f64::consts::PI * r * r * r;
        let coarse = LocalLattice::ball(&g, [1.0, 2.0, 3.0], r, 1).unwrap();
        let fine = LocalLattice::ball(&g, [1.0, 2.0, 3.0], r, 4).unwrap();
        let ec = (coarse.len() as f64 * coarse.cell_volume() - exact).abs();
        let ef = (fine.len() as f64 * fine.cell_volume() - exact).abs();
        assert!(ef < ec);
        assert!(ef / exact < 0.01);
    }
}
