//! Grid export: CSV for inspection and a little-endian binary format for
//! round trips.
//!
//! Binary layout: magic `NCWG`, version u32, dims u32, then per axis
//! lo f64, hi f64, npts u64, then `len` pairs (re f64, im f64) in row-major
//! order with axis 0 slowest.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Axis, GridFn, GridSpec};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"NCWG";
pub const BINARY_VERSION: u32 = 1;

/// One row per cell: coordinates, then re, im.
pub fn write_csv<W: Write>(f: &GridFn, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let spec = f.spec();
    let mut header: Vec<String> = (0..spec.dims()).map(|i| format!("z{i}")).collect();
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header).map_err(csv_err)?;
    for (k, v) in f.values().iter().enumerate() {
        let mut row: Vec<String> = spec.point(k).iter().map(|x| x.to_string()).collect();
        row.push(v.re.to_string());
        row.push(v.im.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_binary<W: Write>(f: &GridFn, mut out: W) -> Result<()> {
    let spec = f.spec();
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&BINARY_VERSION.to_le_bytes())?;
    out.write_all(&(spec.dims() as u32).to_le_bytes())?;
    for a in spec.axes() {
        out.write_all(&a.lo.to_le_bytes())?;
        out.write_all(&a.hi.to_le_bytes())?;
        out.write_all(&(a.npts as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * f.values().len());
    for v in f.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridFn> {
    if &take::<4, _>(&mut r)? != BINARY_MAGIC {
        return Err(Error::InvalidInput("not an NCWG grid file".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != BINARY_VERSION {
        return Err(Error::InvalidInput(format!("unsupported grid file version {version}")));
    }
    let dims = u32::from_le_bytes(take(&mut r)?) as usize;
    if dims > 8 {
        return Err(Error::InvalidInput(format!("grid file declares {dims} axes")));
    }
    let mut axes = Vec::with_capacity(dims);
    for _ in 0..dims {
        let lo = f64::from_le_bytes(take(&mut r)?);
        let hi = f64::from_le_bytes(take(&mut r)?);
        let npts = u64::from_le_bytes(take(&mut r)?) as usize;
        axes.push(Axis { lo, hi, npts });
    }
    let spec = GridSpec::new(axes)?;
    let mut raw = vec![0u8; 16 * spec.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    GridFn::from_values(spec, values, "file")
}
