//! Periodic box discretization.
//!
//! Mode index `m` along an axis maps to the signed alias `m̃ = m` for
//! `m < n/2` and `m̃ = m - n` otherwise, so the Nyquist index `n/2` aliases to
//! `-n/2`. Fields never carry energy on a Nyquist plane: its self-conjugate
//! partner makes odd derivatives and the Leray multiplier break Hermitian
//! symmetry there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default dealiasing fraction (2/3 rule).
pub const TWO_THIRDS: f64 = 2.0 / 3.0;

/// `n³` collocation lattice on `[0, box_length)³` with its wavenumber layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    box_length: f64,
    dealias_fraction: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_modes must be a power of two >= 4, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        Ok(Self {
            n,
            box_length,
            dealias_fraction: TWO_THIRDS,
        })
    }

    /// The `2π`-periodic box most examples use.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn with_dealias(mut self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {fraction}"
            )));
        }
        self.dealias_fraction = fraction;
        Ok(self)
    }

    /// Same box and dealiasing rule at a different resolution.
    pub fn with_modes(&self, n: usize) -> Result<Self> {
        Grid::new(n, self.box_length)?.with_dealias(self.dealias_fraction)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Number of lattice points (and Fourier modes), `n³`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Fundamental wavenumber `2π / box_length`.
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    #[inline]
    pub fn signed(&self, m: usize) -> i64 {
        if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Index of the signed mode `s`, which must satisfy `-n/2 <= s < n/2`.
    #[inline]
    pub fn unsigned(&self, s: i64) -> usize {
        s.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.n / 2
    }

    /// Largest retained `|m̃|` per axis.
    pub fn cutoff(&self) -> i64 {
        let c = (self.dealias_fraction * self.n as f64 / 2.0 + 1e-9).floor() as i64;
        c.min(self.n as i64 / 2 - 1)
    }

    #[inline]
    pub fn kept_1d(&self, m: usize) -> bool {
        !self.is_nyquist(m) && self.signed(m).abs() <= self.cutoff()
    }

    #[inline]
    pub fn kept(&self, i: usize, j: usize, l: usize) -> bool {
        self.kept_1d(i) && self.kept_1d(j) && self.kept_1d(l)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Index of the mode `-k`.
    #[inline]
    pub fn neg(&self, idx: usize) -> usize {
        let n = self.n;
        let (i, j, l) = self.unindex(idx);
        self.index((n - i) % n, (n - j) % n, (n - l) % n)
    }

    /// Wavenumbers along one axis; Nyquist entries are set to zero.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n)
            .map(|m| {
                if self.is_nyquist(m) {
                    0.0
                } else {
                    self.k0() * self.signed(m) as f64
                }
            })
            .collect()
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let (i, j, l) = self.unindex(idx);
        let k0 = self.k0();
        [
            k0 * self.signed(i) as f64,
            k0 * self.signed(j) as f64,
            k0 * self.signed(l) as f64,
        ]
    }

    /// Integer shell `|m̃|²`, so that `|k|² = k0² · shell`.
    #[inline]
    pub fn shell(&self, idx: usize) -> usize {
        let (i, j, l) = self.unindex(idx);
        let (a, b, c) = (self.signed(i), self.signed(j), self.signed(l));
        (a * a + b * b + c * c) as usize
    }

    /// Shell index of every mode.
    pub fn shells(&self) -> Vec<usize> {
        (0..self.len()).map(|idx| self.shell(idx)).collect()
    }

    /// Largest shell among retained modes.
    pub fn max_kept_shell(&self) -> usize {
        let c = self.cutoff() as usize;
        3 * c * c
    }

    /// Per-axis dealias mask.
    pub(crate) fn keep_1d(&self) -> Vec<bool> {
        (0..self.n).map(|m| self.kept_1d(m)).collect()
    }

    /// Dealias mask over all modes (true = retained).
    pub fn mask(&self) -> Vec<bool> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    out.push(self.kept(i, j, l));
                }
            }
        }
        out
    }

    /// Physical coordinate of lattice index `m` along one axis.
    #[inline]
    pub fn coord(&self, m: usize) -> f64 {
        m as f64 * self.dx()
    }

    /// Minimum-image displacement `x - center` on the periodic axis.
    #[inline]
    pub fn periodic_delta(&self, x: f64, center: f64) -> f64 {
        let l = self.box_length;
        let mut d = (x - center).rem_euclid(l);
        if d >= 0.5 * l {
            d -= l;
        }
        d
    }

    /// Largest admissible ball radius for local diagnostics.
    #[inline]
    pub fn max_ball_radius(&self) -> f64 {
        self.box_length / 4.0
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
