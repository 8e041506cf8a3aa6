//! Three-dimensional complex FFTs on the `n³` lattice, plus real-pair packing
//! that moves two real fields through a single complex transform.
//!
//! Transforms can be pruned to a retained index set per axis: spectral input
//! outside the set is treated as zero, spectral output outside the set is not
//! computed. Every 1D line is transformed independently and the order of
//! operations does not depend on the worker count, so results are bitwise
//! identical for any number of rayon threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Lines gathered per block in the strided pass.
const BLOCK: usize = 16;

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

/// Cached plan for an `n³` transform.
pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft3 {
    /// Unnormalized in-place transform; `forward` uses `e^{-ikx}`.
    ///
    /// With `keep`, an inverse transform assumes the input vanishes outside
    /// `keep × keep × keep`, and a forward transform only produces correct
    /// values inside it.
    pub(crate) fn transform(&self, data: &mut [Complex64], forward: bool, keep: Option<&[bool]>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        if forward {
            self.pass_x(data, true);
            self.pass_planes(data, true, keep);
        } else {
            self.pass_planes(data, false, keep);
            self.pass_x(data, false);
        }
    }

    /// z and y transforms inside each x-plane.
    fn pass_planes(&self, data: &mut [Complex64], forward: bool, keep: Option<&[bool]>) {
        let n = self.n;
        let plane = n * n;
        let fft = if forward { &self.forward } else { &self.inverse };
        let kept = |m: usize| keep.is_none_or(|k| k[m]);
        data.par_chunks_mut(plane).enumerate().for_each(|(i, p)| {
            if !kept(i) {
                return;
            }
            let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
            let z_pass = |p: &mut [Complex64], scratch: &mut [Complex64]| {
                for j in 0..n {
                    if kept(j) {
                        fft.process_with_scratch(&mut p[j * n..(j + 1) * n], scratch);
                    }
                }
            };
            if !forward {
                z_pass(p, &mut scratch);
            }
            let mut t = vec![ZERO; plane];
            for j in 0..n {
                for l in 0..n {
                    t[l * n + j] = p[j * n + l];
                }
            }
            fft.process_with_scratch(&mut t, &mut scratch);
            for j in 0..n {
                for l in 0..n {
                    p[j * n + l] = t[l * n + j];
                }
            }
            if forward {
                z_pass(p, &mut scratch);
            }
        });
    }

    /// x transforms: blocks of `BLOCK` adjacent columns are gathered into
    /// contiguous lines, transformed, and scattered back.
    fn pass_x(&self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let plane = n * n;
        let fft = if forward { &self.forward } else { &self.inverse };
        let width = BLOCK.min(plane);
        let src: &[Complex64] = data;
        let blocks: Vec<Vec<Complex64>> = (0..plane / width)
            .into_par_iter()
            .map(|b| {
                let c0 = b * width;
                let mut lines = vec![ZERO; width * n];
                for i in 0..n {
                    let row = &src[i * plane + c0..i * plane + c0 + width];
                    for (w, v) in row.iter().enumerate() {
                        lines[w * n + i] = *v;
                    }
                }
                fft.process(&mut lines);
                lines
            })
            .collect();
        for (b, lines) in blocks.iter().enumerate() {
            let c0 = b * width;
            for i in 0..n {
                let row = &mut data[i * plane + c0..i * plane + c0 + width];
                for (w, v) in row.iter_mut().enumerate() {
                    *v = lines[w * n + i];
                }
            }
        }
    }
}

/// Synthesize one or two real fields from Hermitian spectra `Σ_k f̂(k) e^{ik·x}`.
///
/// With `keep`, coefficients outside the retained set are ignored.
pub(crate) fn inverse_real_pair(
    n: usize,
    a: &[Complex64],
    b: Option<&[Complex64]>,
    keep: Option<&[bool]>,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let i = Complex64::new(0.0, 1.0);
    let mut buf = vec![ZERO; a.len()];
    let kept = |m: usize| keep.is_none_or(|k| k[m]);
    for (row, out) in buf.chunks_mut(n).enumerate() {
        if !(kept(row / n) && kept(row % n)) {
            continue;
        }
        let src = row * n..(row + 1) * n;
        match b {
            Some(b) => {
                for (l, ((o, x), y)) in out.iter_mut().zip(&a[src.clone()]).zip(&b[src]).enumerate() {
                    if kept(l) {
                        *o = x + i * y;
                    }
                }
            }
            None => {
                for (l, (o, x)) in out.iter_mut().zip(&a[src]).enumerate() {
                    if kept(l) {
                        *o = *x;
                    }
                }
            }
        }
    }
    plan(n).transform(&mut buf, false, keep);
    let re = buf.iter().map(|c| c.re).collect();
    let im = b.map(|_| buf.iter().map(|c| c.im).collect());
    (re, im)
}

/// Fourier-series coefficients of one or two real lattice fields.
///
/// With `keep`, coefficients outside the retained set are returned as zero.
pub(crate) fn forward_real_pair(
    n: usize,
    x: &[f64],
    y: Option<&[f64]>,
    keep: Option<&[bool]>,
) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
    let mut buf: Vec<Complex64> = match y {
        Some(y) => x
            .iter()
            .zip(y)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect(),
        None => x.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    };
    plan(n).transform(&mut buf, true, keep);
    let scale = 0.5 / buf.len() as f64;
    let mut b = y.map(|_| vec![ZERO; buf.len()]);
    let kept = |m: usize| keep.is_none_or(|k| k[m]);
    // The retained set is symmetric under m -> -m, so each pair (k, -k) is
    // unpacked in place once.
    for ii in 0..n {
        let ni = (n - ii) % n;
        for jj in 0..n {
            let nj = (n - jj) % n;
            let row = (ii * n + jj) * n;
            if !(kept(ii) && kept(jj)) {
                buf[row..row + n].fill(ZERO);
                continue;
            }
            let nrow = (ni * n + nj) * n;
            for ll in 0..n {
                let idx = row + ll;
                if !kept(ll) {
                    buf[idx] = ZERO;
                    continue;
                }
                let nidx = nrow + (n - ll) % n;
                if nidx < idx {
                    continue;
                }
                let (c, cm) = (buf[idx], buf[nidx]);
                let sum = (c + cm.conj()) * scale;
                buf[idx] = sum;
                buf[nidx] = sum.conj();
                if let Some(b) = b.as_mut() {
                    // (c - conj c(-k)) / (2i)
                    let d = (c - cm.conj()) * scale;
                    b[idx] = Complex64::new(d.im, -d.re);
                    b[nidx] = b[idx].conj();
                }
            }
        }
    }
    (buf, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_synthesis() {
        // û(1,0,0) = û(-1,0,0) = 1/2  ->  cos(x)
        let n = 8;
        let mut a = vec![ZERO; n * n * n];
        a[n * n] = Complex64::new(0.5, 0.0);
        a[(n - 1) * n * n] = Complex64::new(0.5, 0.0);
        let (re, _) = inverse_real_pair(n, &a, None, None);
        for i in 0..n {
            let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            for r in 0..n * n {
                assert!((re[i * n * n + r] - x.cos()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pair_roundtrip() {
        let n = 8;
        let len = n * n * n;
        let x: Vec<f64> = (0..len).map(|k| ((k * 37 % 11) as f64).sin()).collect();
        let y: Vec<f64> = (0..len).map(|k| ((k * 13 % 7) as f64).cos()).collect();
        let (a, b) = forward_real_pair(n, &x, Some(&y), None);
        let (xr, yr) = inverse_real_pair(n, &a, b.as_deref(), None);
        let yr = yr.unwrap();
        for k in 0..len {
            assert!((xr[k] - x[k]).abs() < 1e-13);
            assert!((yr[k] - y[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn pruned_transforms_agree_with_full_ones() {
        let n = 16;
        let len = n * n * n;
        let keep: Vec<bool> = (0..n).map(|m| m <= 5 || m >= n - 5).collect();
        let x: Vec<f64> = (0..len).map(|k| ((k * 37 % 101) as f64 * 0.1).sin()).collect();
        let y: Vec<f64> = (0..len).map(|k| ((k * 13 % 97) as f64 * 0.2).cos()).collect();
        let (a, b) = forward_real_pair(n, &x, Some(&y), None);
        let (ap, bp) = forward_real_pair(n, &x, Some(&y), Some(&keep));
        let (b, bp) = (b.unwrap(), bp.unwrap());
        for idx in 0..len {
            let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
            if keep[i] && keep[j] && keep[l] {
                assert!((a[idx] - ap[idx]).norm() < 1e-15);
                assert!((b[idx] - bp[idx]).norm() < 1e-15);
            } else {
                assert_eq!(ap[idx], ZERO);
            }
        }
        let mut masked = a.clone();
        for (idx, v) in masked.iter_mut().enumerate() {
            let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
            if !(keep[i] && keep[j] && keep[l]) {
                *v = ZERO;
            }
        }
        let (full, _) = inverse_real_pair(n, &masked, None, None);
        let (pruned, _) = inverse_real_pair(n, &a, None, Some(&keep));
        for k in 0..len {
            assert!((full[k] - pruned[k]).abs() < 1e-13);
        }
    }
}
