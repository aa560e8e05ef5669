//! Binary field container and CSV export.
//!
//! Container layout, all little-endian:
//!
//! ```text
//! magic    4 bytes  "CLAB"
//! version  u32      1
//! dim      u32      1 or 2
//! n_pts    u64      per axis (dim entries)
//! lo       f64      per axis
//! hi       f64      per axis
//! values   f64      prod(n_pts) entries, row-major
//! ```
//!
//! Raw value blocks may contain NaN (censored nodes of an opening field);
//! [`read_field`] rejects those since a [`ScalarField`] is finite.

use super::{GridDomain, ScalarField};
use crate::error::{Error, Result};
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"CLAB";
pub const VERSION: u32 = 1;

pub fn write_values<W: Write>(w: &mut W, domain: &GridDomain, values: &[f64]) -> Result<()> {
    if values.len() != domain.len() {
        return Err(Error::GridMismatch);
    }
    let mut buf = Vec::with_capacity(16 + 24 * domain.dim() + 8 * values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(domain.dim() as u32).to_le_bytes());
    for &n in domain.n_pts() {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for &x in domain.lo() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for &x in domain.hi() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_field<W: Write>(w: &mut W, u: &ScalarField) -> Result<()> {
    write_values(w, u.domain(), u.values())
}

/// Reads a container, returning the grid and the raw values.
pub fn read_values<R: Read>(r: &mut R) -> Result<(GridDomain, Vec<f64>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes
            .get(pos..pos + n)
            .ok_or_else(|| Error::Format("truncated container".into()))?;
        pos += n;
        Ok(s)
    };
    if take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if !(dim == 1 || dim == 2) {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let mut n = Vec::with_capacity(dim);
    for _ in 0..dim {
        n.push(u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize);
    }
    let mut f64s = |k: usize| -> Result<Vec<f64>> {
        (0..k)
            .map(|_| Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())))
            .collect()
    };
    let lo = f64s(dim)?;
    let hi = f64s(dim)?;
    let domain = GridDomain::new(&lo, &hi, &n)?;
    let values = f64s(domain.len())?;
    if pos != bytes.len() {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok((domain, values))
}

pub fn read_field<R: Read>(r: &mut R) -> Result<ScalarField> {
    let (d, v) = read_values(r)?;
    ScalarField::new(d, v)
}

/// One row per node: `x1[,x2],<columns...>`.
pub fn write_csv<W: Write>(
    w: &mut W,
    domain: &GridDomain,
    columns: &[(&str, &[f64])],
) -> Result<()> {
    let axes = if domain.dim() == 1 { "x1" } else { "x1,x2" };
    let names: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
    writeln!(w, "{axes},{}", names.join(","))?;
    for (_, c) in columns {
        if c.len() != domain.len() {
            return Err(Error::GridMismatch);
        }
    }
    for k in 0..domain.len() {
        let x = domain.coord(k);
        let coords: Vec<String> = x.as_slice().iter().map(|v| v.to_string()).collect();
        let vals: Vec<String> = columns.iter().map(|(_, c)| c[k].to_string()).collect();
        writeln!(w, "{},{}", coords.join(","), vals.join(","))?;
    }
    Ok(())
}

pub fn write_field_csv<W: Write>(w: &mut W, u: &ScalarField) -> Result<()> {
    write_csv(w, u.domain(), &[("value", u.values())])
}
