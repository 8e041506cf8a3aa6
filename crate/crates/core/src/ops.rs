//! Mode-wise differential operators, projections, norms and the dealiased
//! quadratic term.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft;
use crate::field::{PhysicalField, ScalarSpectralField, SpectralField, SpectralVelocity, ZERO};
use crate::grid::Grid;

/// Coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

#[inline]
fn dot(k: [f64; 3], v: [Complex64; 3]) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

/// Helmholtz–Leray projection `P_ij(k) = δ_ij - k_i k_j / |k|²`.
pub fn leray_project(u: &SpectralVelocity) -> SpectralVelocity {
    let g = *u.grid();
    let k = g.wavenumbers();
    let n = g.n();
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|c| u.comp(c).to_vec());
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                let kv = [k[i], k[j], k[l]];
                let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
                if k2 == 0.0 {
                    continue;
                }
                let v = [comps[0][idx], comps[1][idx], comps[2][idx]];
                let s = dot(kv, v) / k2;
                for c in 0..3 {
                    comps[c][idx] = v[c] - s * kv[c];
                }
            }
        }
    }
    SpectralVelocity::from_raw(g, comps)
}

/// Riesz product `R_i R_j f` with multiplier `-k_i k_j / |k|²`.
pub fn riesz_multiply(a: Axis, b: Axis, f: &ScalarSpectralField) -> ScalarSpectralField {
    let (a, b) = (a.index(), b.index());
    f.map_real_multiplier(|k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            0.0
        } else {
            -k[a] * k[b] / k2
        }
    })
}

/// `(-Δ)^s f`: multiplier `|k|^{2s}`, zero mode stays zero.
pub fn laplacian_power<F: SpectralField>(f: &F, s: f64) -> F {
    f.map_real_multiplier(|k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(s)
        }
    })
}

/// Heat semigroup multiplier `e^{-|k|² t}` without argument checks.
pub(crate) fn heat_multiply<F: SpectralField>(f: &F, t: f64) -> F {
    if t == 0.0 {
        return f.clone();
    }
    f.map_real_multiplier(|k| (-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * t).exp())
}

pub fn gradient(f: &ScalarSpectralField) -> SpectralVelocity {
    let g = *f.grid();
    let k = g.wavenumbers();
    let n = g.n();
    let src = f.coeffs();
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; g.len()]);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                let ik = src[idx] * Complex64::new(0.0, 1.0);
                comps[0][idx] = ik * k[i];
                comps[1][idx] = ik * k[j];
                comps[2][idx] = ik * k[l];
            }
        }
    }
    SpectralVelocity::from_raw(g, comps)
}

pub fn divergence(u: &SpectralVelocity) -> ScalarSpectralField {
    let g = *u.grid();
    let k = g.wavenumbers();
    let n = g.n();
    let mut out = vec![ZERO; g.len()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                out[idx] = dot([k[i], k[j], k[l]], u.mode(idx)) * Complex64::new(0.0, 1.0);
            }
        }
    }
    ScalarSpectralField::from_raw(g, out)
}

/// Spectral derivative `∂_axis` of one component array.
pub(crate) fn partial(g: &Grid, c: &[Complex64], axis: usize) -> Vec<Complex64> {
    let k = g.wavenumbers();
    let n = g.n();
    let mut out = vec![ZERO; g.len()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                let kk = [k[i], k[j], k[l]][axis];
                out[idx] = c[idx] * Complex64::new(0.0, kk);
            }
        }
    }
    out
}

pub fn curl(u: &SpectralVelocity) -> SpectralVelocity {
    let g = *u.grid();
    let d = |c: usize, a: usize| partial(&g, u.comp(c), a);
    let sub = |a: Vec<Complex64>, b: Vec<Complex64>| -> Vec<Complex64> {
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    };
    let cx = sub(d(2, 1), d(1, 2));
    let cy = sub(d(0, 2), d(2, 0));
    let cz = sub(d(1, 0), d(0, 1));
    SpectralVelocity::from_raw(g, [cx, cy, cz])
}

/// Homogeneous Sobolev norm `‖f‖_{Ḣ^s} = (L³ Σ_k |k|^{2s} |f̂(k)|²)^{1/2}`.
///
/// `s = 0` reproduces the physical `L²` norm (Parseval).
pub fn hs_norm<F: SpectralField>(f: &F, s: f64) -> f64 {
    hs_norm_sq(f, s).sqrt()
}

pub(crate) fn hs_norm_sq<F: SpectralField>(f: &F, s: f64) -> f64 {
    let g = f.grid();
    let k0sq = g.k0() * g.k0();
    let max_shell = 3 * (g.n() / 2) * (g.n() / 2);
    let weights: Vec<f64> = (0..=max_shell)
        .map(|q| if q == 0 { 0.0 } else { (k0sq * q as f64).powf(s) })
        .collect();
    let n = g.n();
    let sq: Vec<i64> = (0..n).map(|m| g.signed(m) * g.signed(m)).collect();
    let mut total = 0.0;
    for comp in f.components() {
        for i in 0..n {
            for j in 0..n {
                let base = g.index(i, j, 0);
                let qij = sq[i] + sq[j];
                for l in 0..n {
                    let v = comp[base + l];
                    if v != ZERO {
                        total += weights[(qij + sq[l]) as usize] * v.norm_sqr();
                    }
                }
            }
        }
    }
    total * g.volume()
}

/// `L²` inner product `∫ u·v dx`.
pub fn inner(u: &SpectralVelocity, v: &SpectralVelocity) -> Result<f64> {
    u.grid().check_same(v.grid())?;
    let mut s = 0.0;
    for c in 0..3 {
        for (a, b) in u.comp(c).iter().zip(v.comp(c)) {
            s += (a.conj() * b).re;
        }
    }
    Ok(s * u.grid().volume())
}

/// Energy `∫|u|² dx`.
pub fn energy(u: &SpectralVelocity) -> f64 {
    hs_norm_sq(u, 0.0)
}

/// Enstrophy-type dissipation `∫|∇u|² dx`.
pub fn grad_sq(u: &SpectralVelocity) -> f64 {
    hs_norm_sq(u, 1.0)
}

/// Fraction of energy held by the top third of retained modes (cube norm).
pub fn tail_fraction(u: &SpectralVelocity) -> f64 {
    let g = u.grid();
    let n = g.n();
    let threshold = 2.0 * g.cutoff() as f64 / 3.0;
    let (mut tail, mut total) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = g.index(i, j, l);
                let e: f64 = (0..3).map(|c| u.comp(c)[idx].norm_sqr()).sum();
                if e == 0.0 {
                    continue;
                }
                total += e;
                let m = g.signed(i).abs().max(g.signed(j).abs()).max(g.signed(l).abs());
                if m as f64 > threshold {
                    tail += e;
                }
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Lattice-quadrature `L^p` norm of the pointwise magnitude; `p = ∞` gives the max.
pub fn lp_norm(f: &PhysicalField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("lp_norm needs p >= 1, got {p}")));
    }
    let len = f.grid().len();
    if p.is_infinite() {
        return Ok(f.max_magnitude());
    }
    let mut s = 0.0;
    for i in 0..len {
        s += f.magnitude_at(i).powf(p);
    }
    Ok((s * f.grid().cell_volume()).powf(1.0 / p))
}

/// Dealiased spectra of the pointwise products `u_i v_j`.
pub(crate) struct Products {
    spectra: Vec<Vec<Complex64>>,
    slot: [[usize; 3]; 3],
}

impl Products {
    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> &[Complex64] {
        &self.spectra[self.slot[i][j]]
    }
}

/// Physical components of the dealiased part of `u`.
pub(crate) fn physical_dealiased(u: &SpectralVelocity) -> [Vec<f64>; 3] {
    physical(u, Some(&u.grid().keep_1d()))
}

fn physical(u: &SpectralVelocity, keep: Option<&[bool]>) -> [Vec<f64>; 3] {
    let n = u.grid().n();
    let (a, b) = fft::inverse_real_pair(n, u.comp(0), Some(u.comp(1)), keep);
    let (c, _) = fft::inverse_real_pair(n, u.comp(2), None, keep);
    [a, b.expect("paired transform"), c]
}

pub(crate) fn forward_many(g: &Grid, fields: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let n = g.n();
    let keep = g.keep_1d();
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let (a, b) = fft::forward_real_pair(n, &pair[0], pair.get(1).map(|v| v.as_slice()), Some(&keep));
        out.push(a);
        if let Some(b) = b {
            out.push(b);
        }
    }
    for s in out.iter_mut() {
        s[0] = ZERO;
    }
    out
}

/// Products `u_i v_j` computed by collocation with the dealias mask applied
/// to both factors and to the result. `v = None` means `v = u`.
pub(crate) fn products(u: &SpectralVelocity, v: Option<&SpectralVelocity>) -> Products {
    let g = *u.grid();
    let up = physical_dealiased(u);
    match v {
        None => {
            let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
            let fields: Vec<Vec<f64>> = pairs
                .iter()
                .map(|&(a, b)| up[a].iter().zip(&up[b]).map(|(x, y)| x * y).collect())
                .collect();
            let spectra = forward_many(&g, &fields);
            let slot = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
            Products { spectra, slot }
        }
        Some(v) => {
            let vp = physical_dealiased(v);
            let mut fields = Vec::with_capacity(9);
            for a in 0..3 {
                for b in 0..3 {
                    fields.push(up[a].iter().zip(&vp[b]).map(|(x, y)| x * y).collect());
                }
            }
            let spectra = forward_many(&g, &fields);
            let slot = [[0, 1, 2], [3, 4, 5], [6, 7, 8]];
            Products { spectra, slot }
        }
    }
}

fn divergence_of_products(g: &Grid, w: &Products, project: bool) -> SpectralVelocity {
    let k = g.wavenumbers();
    let n = g.n();
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; g.len()]);
    for i in 0..n {
        if !g.kept_1d(i) {
            continue;
        }
        for j in 0..n {
            if !g.kept_1d(j) {
                continue;
            }
            for l in 0..n {
                if !g.kept_1d(l) {
                    continue;
                }
                let idx = g.index(i, j, l);
                let kv = [k[i], k[j], k[l]];
                let mut d = [ZERO; 3];
                for (a, da) in d.iter_mut().enumerate() {
                    let s = w.get(a, 0)[idx] * kv[0]
                        + w.get(a, 1)[idx] * kv[1]
                        + w.get(a, 2)[idx] * kv[2];
                    *da = Complex64::new(-s.im, s.re);
                }
                if project {
                    let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
                    if k2 > 0.0 {
                        let s = dot(kv, d) / k2;
                        for c in 0..3 {
                            d[c] -= s * kv[c];
                        }
                    }
                }
                for c in 0..3 {
                    comps[c][idx] = d[c];
                }
            }
        }
    }
    SpectralVelocity::from_raw(*g, comps)
}

/// Spectral coefficients of `∇·(u⊗v)`, i.e. `∂_j(u_i v_j)`, dealiased.
pub fn nonlinear_term(u: &SpectralVelocity, v: &SpectralVelocity) -> Result<SpectralVelocity> {
    u.grid().check_same(v.grid())?;
    let w = if std::ptr::eq(u, v) || u == v {
        products(u, None)
    } else {
        products(u, Some(v))
    };
    Ok(divergence_of_products(u.grid(), &w, false))
}

/// `P∇·(u⊗u)`, the projected convection term driving the solver.
pub fn projected_convection(u: &SpectralVelocity) -> SpectralVelocity {
    let w = products(u, None);
    divergence_of_products(u.grid(), &w, true)
}
