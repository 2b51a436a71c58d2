//! Grid files.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "CTGRID\0\x01"
//! dims         u32
//! boundary     u8       0 periodic, 1 Dirichlet
//! kind         u8       0 half-density, 1 phase section
//! reserved     u16
//! config_dim   u32      phase sections only, else 0
//! momentum_dim u32      phase sections only, else 0
//! per axis:    u64 n, f64 min, f64 max, u32 label length, label bytes (UTF-8)
//! payload:     n_total pairs of f64 (re, im), row-major, last axis fastest
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::grid::{Axis, Boundary, Grid, GridGeometry, GridKind};
use crate::error::{Error, Result};
use crate::Complex64;

const MAGIC: &[u8; 8] = b"CTGRID\0\x01";

pub fn write_binary<W: Write>(grid: &Grid, mut w: W) -> Result<()> {
    let g = &grid.geometry;
    w.write_all(MAGIC)?;
    w.write_all(&(g.dims() as u32).to_le_bytes())?;
    w.write_all(&[match g.boundary() {
        Boundary::Periodic => 0,
        Boundary::DirichletZero => 1,
    }])?;
    let (kind, nq, np) = match grid.kind {
        GridKind::HalfDensity => (0u8, 0u32, 0u32),
        GridKind::PhaseSection { config_dim, momentum_dim } => (1, config_dim as u32, momentum_dim as u32),
    };
    w.write_all(&[kind])?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&nq.to_le_bytes())?;
    w.write_all(&np.to_le_bytes())?;
    for a in g.axes() {
        w.write_all(&(a.n as u64).to_le_bytes())?;
        w.write_all(&a.min.to_le_bytes())?;
        w.write_all(&a.max.to_le_bytes())?;
        w.write_all(&(a.label.len() as u32).to_le_bytes())?;
        w.write_all(a.label.as_bytes())?;
    }
    for v in &grid.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn malformed(msg: &str) -> Error {
    Error::GridMismatch(format!("malformed grid file: {msg}"))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Grid> {
    if &take::<8, _>(&mut r)? != MAGIC {
        return Err(malformed("bad magic"));
    }
    let dims = u32::from_le_bytes(take(&mut r)?) as usize;
    let boundary = match take::<1, _>(&mut r)?[0] {
        0 => Boundary::Periodic,
        1 => Boundary::DirichletZero,
        _ => return Err(malformed("unknown boundary tag")),
    };
    let kind_tag = take::<1, _>(&mut r)?[0];
    let _reserved = take::<2, _>(&mut r)?;
    let nq = u32::from_le_bytes(take(&mut r)?) as usize;
    let np = u32::from_le_bytes(take(&mut r)?) as usize;
    let kind = match kind_tag {
        0 => GridKind::HalfDensity,
        1 => GridKind::PhaseSection { config_dim: nq, momentum_dim: np },
        _ => return Err(malformed("unknown grid kind")),
    };
    if dims == 0 || dims > 8 {
        return Err(malformed("implausible dimension"));
    }
    let mut axes = Vec::with_capacity(dims);
    for _ in 0..dims {
        let n = u64::from_le_bytes(take(&mut r)?) as usize;
        let min = f64::from_le_bytes(take(&mut r)?);
        let max = f64::from_le_bytes(take(&mut r)?);
        let len = u32::from_le_bytes(take(&mut r)?) as usize;
        let mut label = vec![0u8; len];
        r.read_exact(&mut label)?;
        let label = String::from_utf8(label).map_err(|_| malformed("label is not UTF-8"))?;
        axes.push(Axis { label, min, max, n });
    }
    let geometry = GridGeometry::new(axes, boundary)?;
    let mut values = Vec::with_capacity(geometry.len());
    for _ in 0..geometry.len() {
        let re = f64::from_le_bytes(take(&mut r)?);
        let im = f64::from_le_bytes(take(&mut r)?);
        values.push(Complex64::new(re, im));
    }
    Grid::new(geometry, kind, values)
}

pub fn save_binary(grid: &Grid, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_binary(grid, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_binary(path: &Path) -> Result<Grid> {
    read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn to_json(grid: &Grid) -> Result<String> {
    Ok(serde_json::to_string(grid)?)
}

pub fn from_json(text: &str) -> Result<Grid> {
    let g: Grid = serde_json::from_str(text)?;
    let geometry = GridGeometry::new(g.geometry.axes().to_vec(), g.geometry.boundary())?;
    Grid::new(geometry, g.kind, g.values)
}
