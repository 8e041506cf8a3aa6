//! Binary snapshot files.
//!
//! Layout (little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `NSSF` |
//! | 4     | version (`u32`, currently 1) |
//! | 4     | `n_modes` (`u32`) |
//! | 8     | `box_length` (`f64`) |
//! | 8     | time (`f64`) |
//! | 4     | component count (`u32`, 1 or 3) |
//! | 16·n³ per component | `(re, im)` pairs, component-major, row-major `(i, j, l)` |
//!
//! Writers emit canonical (Hermitian) spectra; readers reject anything that
//! is not Hermitian to `1e-12` relative.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarSpectralField, SpectralField, SpectralVelocity};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"NSSF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotField {
    Velocity(SpectralVelocity),
    Scalar(ScalarSpectralField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: SnapshotField,
}

impl Snapshot {
    pub fn into_velocity(self) -> Result<(f64, SpectralVelocity)> {
        match self.field {
            SnapshotField::Velocity(u) => Ok((self.time, u)),
            SnapshotField::Scalar(_) => Err(Error::InvalidArgument(
                "expected a velocity snapshot, found a scalar one".into(),
            )),
        }
    }
}

pub fn write_snapshot<W: Write, F: SpectralField>(mut w: W, time: f64, field: &F) -> Result<()> {
    let g = field.grid();
    let comps = field.components();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.box_length().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    w.write_all(&(comps.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for c in comps {
        buf.clear();
        for v in c {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Snapshot {
        offset: offset as u64,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(format_err(
                self.bytes.len(),
                format!(
                    "truncated while reading {what}: needed {} bytes, file has {}",
                    self.pos + len,
                    self.bytes.len()
                ),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 0,
    };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(format_err(0, format!("bad magic {magic:?}")));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let n = cur.u32("n_modes")? as usize;
    let box_length = cur.f64("box_length")?;
    let grid = Grid::new(n, box_length).map_err(|e| format_err(8, e.to_string()))?;
    let time = cur.f64("time")?;
    let count = cur.u32("component count")? as usize;
    if count != 1 && count != 3 {
        return Err(format_err(28, format!("component count must be 1 or 3, got {count}")));
    }
    let mut comps = Vec::with_capacity(count);
    for c in 0..count {
        let start = cur.pos;
        let raw = cur.take(16 * grid.len(), &format!("component {c}"))?;
        let coeffs: Vec<Complex64> = raw
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..].try_into().unwrap()),
                )
            })
            .collect();
        check_hermitian(&grid, &coeffs, start)?;
        comps.push(coeffs);
    }
    if cur.pos != bytes.len() {
        return Err(format_err(cur.pos, "trailing bytes after last component"));
    }
    let field = if count == 1 {
        SnapshotField::Scalar(ScalarSpectralField::from_coeffs(grid, comps.pop().unwrap())?)
    } else {
        let c2 = comps.pop().unwrap();
        let c1 = comps.pop().unwrap();
        let c0 = comps.pop().unwrap();
        SnapshotField::Velocity(SpectralVelocity::from_components(grid, [c0, c1, c2])?)
    };
    Ok(Snapshot { time, field })
}

fn check_hermitian(grid: &Grid, c: &[Complex64], start: usize) -> Result<()> {
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (idx, v) in c.iter().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(format_err(start + 16 * idx, "non-finite coefficient"));
        }
        let d = (v - c[grid.neg(idx)].conj()).norm();
        if d > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(format_err(
                start + 16 * idx,
                format!("coefficient {idx} breaks Hermitian symmetry (defect {d:e})"),
            ));
        }
    }
    Ok(())
}

pub fn save<F: SpectralField>(path: impl AsRef<Path>, time: f64, field: &F) -> Result<()> {
    let f = File::create(path)?;
    write_snapshot(BufWriter::new(f), time, field)
}

pub fn load(path: impl AsRef<Path>) -> Result<Snapshot> {
    read_snapshot(BufReader::new(File::open(path)?))
}
