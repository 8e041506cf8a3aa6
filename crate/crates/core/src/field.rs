//! Spectral and physical field containers.
//!
//! Spectral coefficients are Fourier-series amplitudes: a physical field is
//! `f(x) = Σ_k f̂(k) e^{ik·x}`, so `∫_box |f|² = L³ Σ_k |f̂(k)|²`. Every
//! constructor returns a canonical field: Hermitian, zero mean, and empty on
//! the Nyquist planes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Common view over scalar and vector spectral fields.
pub trait SpectralField: Clone {
    fn grid(&self) -> &Grid;
    fn components(&self) -> &[Vec<Complex64>];
    fn components_mut(&mut self) -> &mut [Vec<Complex64>];

    /// Apply a real mode-wise multiplier `m(k)` to every component.
    fn map_real_multiplier(&self, mult: impl Fn([f64; 3]) -> f64) -> Self {
        let mut out = self.clone();
        let grid = *self.grid();
        let k = grid.wavenumbers();
        let n = grid.n();
        for c in out.components_mut() {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let idx = grid.index(i, j, l);
                        if c[idx] != ZERO {
                            c[idx] *= mult([k[i], k[j], k[l]]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Zero every mode outside the dealias mask.
    fn dealiased(&self) -> Self {
        let mut out = self.clone();
        let grid = *self.grid();
        let mask = grid.mask();
        for c in out.components_mut() {
            for (v, &keep) in c.iter_mut().zip(&mask) {
                if !keep {
                    *v = ZERO;
                }
            }
        }
        out
    }

    /// Largest `|f̂(k) - conj f̂(-k)|` relative to the largest coefficient.
    fn hermitian_defect(&self) -> f64 {
        let grid = self.grid();
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for c in self.components() {
            for (idx, v) in c.iter().enumerate() {
                scale = scale.max(v.norm());
                worst = worst.max((v - c[grid.neg(idx)].conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    fn is_zero(&self) -> bool {
        self.components().iter().all(|c| c.iter().all(|v| *v == ZERO))
    }

    fn to_physical(&self) -> PhysicalField {
        let grid = *self.grid();
        let n = grid.n();
        let comps = self.components();
        let mut values = Vec::with_capacity(comps.len());
        for pair in comps.chunks(2) {
            let (a, b) = fft::inverse_real_pair(n, &pair[0], pair.get(1).map(|v| v.as_slice()), None);
            values.push(a);
            if let Some(b) = b {
                values.push(b);
            }
        }
        PhysicalField { grid, values }
    }
}

/// Project raw coefficients onto the canonical subspace in place.
pub(crate) fn canonicalize(grid: &Grid, c: &mut [Complex64]) {
    let n = grid.n();
    let half = n / 2;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = grid.index(i, j, l);
                if i == half || j == half || l == half {
                    c[idx] = ZERO;
                    continue;
                }
                let nidx = grid.index((n - i) % n, (n - j) % n, (n - l) % n);
                if nidx < idx {
                    continue;
                }
                if nidx == idx {
                    c[idx] = Complex64::new(c[idx].re, 0.0);
                } else {
                    let v = (c[idx] + c[nidx].conj()) * 0.5;
                    c[idx] = v;
                    c[nidx] = v.conj();
                }
            }
        }
    }
    c[0] = ZERO;
}

fn check_len(grid: &Grid, v: &[Complex64]) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Three-component spectral vector field (the solver state).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVelocity {
    grid: Grid,
    comps: [Vec<Complex64>; 3],
}

impl SpectralField for SpectralVelocity {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }
    fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }
}

impl SpectralVelocity {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![ZERO; grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    /// Canonicalizes the input (Hermitian part, zero mean, no Nyquist content).
    pub fn from_components(grid: Grid, mut comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in comps.iter_mut() {
            check_len(&grid, c)?;
            canonicalize(&grid, c);
        }
        Ok(Self { grid, comps })
    }

    /// Wraps coefficients that are already canonical.
    pub(crate) fn from_raw(grid: Grid, comps: [Vec<Complex64>; 3]) -> Self {
        Self { grid, comps }
    }

    /// Field from a list of `(signed mode, amplitude)` pairs; the conjugate
    /// partner at `-k` is filled in.
    pub fn from_modes(grid: Grid, modes: &[([i64; 3], [Complex64; 3])]) -> Result<Self> {
        let mut out = Self::zeros(grid);
        let half = grid.n() as i64 / 2;
        for (m, amp) in modes {
            if m.iter().any(|&s| s <= -half || s >= half) {
                return Err(Error::InvalidArgument(format!(
                    "mode {m:?} not representable on an n={} grid",
                    grid.n()
                )));
            }
            let idx = grid.index(grid.unsigned(m[0]), grid.unsigned(m[1]), grid.unsigned(m[2]));
            let nidx = grid.neg(idx);
            for c in 0..3 {
                out.comps[c][idx] += amp[c];
                if nidx != idx {
                    out.comps[c][nidx] += amp[c].conj();
                }
            }
        }
        for c in out.comps.iter_mut() {
            canonicalize(&grid, c);
        }
        Ok(out)
    }

    pub fn from_physical(f: &PhysicalField) -> Result<Self> {
        if f.values.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "vector field needs 3 components, got {}",
                f.values.len()
            )));
        }
        let grid = f.grid;
        let n = grid.n();
        let (a, b) = fft::forward_real_pair(n, &f.values[0], Some(&f.values[1]), None);
        let (c, _) = fft::forward_real_pair(n, &f.values[2], None, None);
        let mut comps = [a, b.unwrap(), c];
        for c in comps.iter_mut() {
            canonicalize(&grid, c);
        }
        Ok(Self { grid, comps })
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    /// Coefficients at a signed mode.
    pub fn mode_at(&self, m: [i64; 3]) -> [Complex64; 3] {
        let g = &self.grid;
        self.mode(g.index(g.unsigned(m[0]), g.unsigned(m[1]), g.unsigned(m[2])))
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let comps = std::array::from_fn(|c| {
            self.comps[c]
                .iter()
                .zip(&other.comps[c])
                .map(|(&a, &b)| f(a, b))
                .collect()
        });
        Ok(Self {
            grid: self.grid,
            comps,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let comps = std::array::from_fn(|c| self.comps[c].iter().map(|&a| a * s).collect());
        Self {
            grid: self.grid,
            comps,
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) -> Result<()> {
        self.grid.check_same(&x.grid)?;
        for c in 0..3 {
            for (s, &v) in self.comps[c].iter_mut().zip(&x.comps[c]) {
                *s += v * a;
            }
        }
        Ok(())
    }

    /// Relative divergence `‖k·û‖ / ‖|k| û‖` (0 for the zero field).
    pub fn divergence_ratio(&self) -> f64 {
        let g = &self.grid;
        let k = g.wavenumbers();
        let n = g.n();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = g.index(i, j, l);
                    let kv = [k[i], k[j], k[l]];
                    let d = self.comps[0][idx] * kv[0]
                        + self.comps[1][idx] * kv[1]
                        + self.comps[2][idx] * kv[2];
                    num += d.norm_sqr();
                    let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
                    den += k2
                        * (self.comps[0][idx].norm_sqr()
                            + self.comps[1][idx].norm_sqr()
                            + self.comps[2][idx].norm_sqr());
                }
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    pub(crate) fn require_divergence_free(&self, tol: f64) -> Result<()> {
        let r = self.divergence_ratio();
        if r > tol {
            Err(Error::NotDivergenceFree(r))
        } else {
            Ok(())
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Re-impose Hermitian symmetry and the zero-mean / Nyquist constraints.
    pub fn canonicalized(mut self) -> Self {
        let g = self.grid;
        for c in self.comps.iter_mut() {
            canonicalize(&g, c);
        }
        self
    }
}

/// Scalar spectral field (pressure and its pieces).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpectralField {
    grid: Grid,
    coeffs: [Vec<Complex64>; 1],
}

impl SpectralField for ScalarSpectralField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }
    fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.coeffs
    }
}

impl ScalarSpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: [vec![ZERO; grid.len()]],
        }
    }

    pub fn from_coeffs(grid: Grid, mut coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, &coeffs)?;
        canonicalize(&grid, &mut coeffs);
        Ok(Self {
            grid,
            coeffs: [coeffs],
        })
    }

    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        Self {
            grid,
            coeffs: [coeffs],
        }
    }

    pub fn from_modes(grid: Grid, modes: &[([i64; 3], Complex64)]) -> Result<Self> {
        let vec_modes: Vec<_> = modes
            .iter()
            .map(|(m, a)| (*m, [*a, ZERO, ZERO]))
            .collect();
        let v = SpectralVelocity::from_modes(grid, &vec_modes)?;
        let [c, _, _] = v.into_components();
        Ok(Self::from_raw(grid, c))
    }

    pub fn from_physical(f: &PhysicalField) -> Result<Self> {
        if f.values.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "scalar field needs 1 component, got {}",
                f.values.len()
            )));
        }
        let (mut c, _) = fft::forward_real_pair(f.grid.n(), &f.values[0], None, None);
        canonicalize(&f.grid, &mut c);
        Ok(Self::from_raw(f.grid, c))
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs[0]
    }

    pub fn coeff_at(&self, m: [i64; 3]) -> Complex64 {
        let g = &self.grid;
        self.coeffs[0][g.index(g.unsigned(m[0]), g.unsigned(m[1]), g.unsigned(m[2]))]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.coeffs[0]
                .iter()
                .zip(&other.coeffs[0])
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.coeffs[0]
                .iter()
                .zip(&other.coeffs[0])
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.grid, self.coeffs[0].iter().map(|a| a * s).collect())
    }
}

/// Real samples on the `n³` collocation lattice, one or three components.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<Vec<f64>>,
}

impl PhysicalField {
    pub fn new(grid: Grid, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != 1 && values.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "physical fields carry 1 or 3 components, got {}",
                values.len()
            )));
        }
        for v in &values {
            if v.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    got: v.len(),
                });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn scalar(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, vec![values])
    }

    /// Sample `f` at every lattice point.
    pub fn from_fn<const C: usize>(grid: Grid, f: impl Fn([f64; 3]) -> [f64; C]) -> Result<Self> {
        let n = grid.n();
        let mut values = vec![Vec::with_capacity(grid.len()); C];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = f([grid.coord(i), grid.coord(j), grid.coord(l)]);
                    for c in 0..C {
                        values[c].push(v[c]);
                    }
                }
            }
        }
        Self::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn n_components(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    /// Euclidean magnitude over components at lattice point `idx`.
    #[inline]
    pub fn magnitude_at(&self, idx: usize) -> f64 {
        if self.values.len() == 1 {
            self.values[0][idx].abs()
        } else {
            self.values
                .iter()
                .map(|v| v[idx] * v[idx])
                .sum::<f64>()
                .sqrt()
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.magnitude_at(i))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_roundtrip() {
        let g = Grid::periodic(8).unwrap();
        let u = SpectralVelocity::zeros(g);
        let back = SpectralVelocity::from_physical(&u.to_physical()).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn single_mode_samples_closed_form() {
        // û(k0) = (a + ib) e  ->  2a cos(k0·x) - 2b sin(k0·x)
        let g = Grid::periodic(8).unwrap();
        let amp = Complex64::new(0.3, -0.2);
        let u = SpectralVelocity::from_modes(g, &[([1, 2, 0], [ZERO, ZERO, amp])]).unwrap();
        let p = u.to_physical();
        let n = g.n();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let x = [g.coord(i), g.coord(j), g.coord(l)];
                    let phase = x[0] + 2.0 * x[1];
                    let expect = 2.0 * amp.re * phase.cos() - 2.0 * amp.im * phase.sin();
                    let got = p.component(2)[g.index(i, j, l)];
                    assert!((got - expect).abs() < 1e-14, "{got} vs {expect}");
                    assert_eq!(p.component(0)[g.index(i, j, l)], 0.0);
                }
            }
        }
    }

    #[test]
    fn constructors_enforce_canonical_form() {
        let g = Grid::periodic(8).unwrap();
        let mut c = vec![Complex64::new(1.0, 1.0); g.len()];
        c[g.index(1, 0, 0)] = Complex64::new(2.0, 0.0);
        let f = ScalarSpectralField::from_coeffs(g, c).unwrap();
        assert_eq!(f.coeffs()[0], ZERO);
        assert_eq!(f.coeffs()[g.index(4, 1, 1)], ZERO);
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = Grid::periodic(8).unwrap();
        let err = ScalarSpectralField::from_coeffs(g, vec![ZERO; 10]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { expected: 512, got: 10 }));
        let err = PhysicalField::scalar(g, vec![0.0; 7]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn physical_roundtrip_of_smooth_field() {
        let g = Grid::periodic(16).unwrap();
        let f = PhysicalField::from_fn(g, |x| [(x[0] + 2.0 * x[2]).sin() * (x[1]).cos()]).unwrap();
        let s = ScalarSpectralField::from_physical(&f).unwrap();
        let back = s.to_physical();
        for (a, b) in back.component(0).iter().zip(f.component(0)) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
