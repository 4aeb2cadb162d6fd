//! File formats: raw little-endian grids/traces/matrices with a 32-byte
//! header (magic, two u64 dims, one f64 spacing), CSV traces, and 8-bit
//! grayscale previews.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::acoustics::BoundaryTrace;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryParametrization, Grid, ScalarField};
use crate::inverse::DenseMatrix;

const MAGIC: &[u8; 8] = b"ROTOPAT1";

fn write_header(w: &mut impl Write, dim0: u64, dim1: u64, spacing: f64) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&dim0.to_le_bytes())?;
    w.write_all(&dim1.to_le_bytes())?;
    w.write_all(&spacing.to_le_bytes())?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<(u64, u64, f64)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("bad magic in raw file".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let d0 = u64::from_le_bytes(buf);
    r.read_exact(&mut buf)?;
    let d1 = u64::from_le_bytes(buf);
    r.read_exact(&mut buf)?;
    let sp = f64::from_le_bytes(buf);
    Ok((d0, d1, sp))
}

fn write_values(w: &mut impl Write, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_values(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Row-major nodal field with the grid spacing in the header.
pub fn write_field_raw(path: &Path, field: &ScalarField<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = field.grid().n_per_side() as u64;
    write_header(&mut w, n, n, field.grid().spacing())?;
    write_values(&mut w, field.values())?;
    w.flush()?;
    Ok(())
}

fn open_for_read(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Reads a field written by `write_field_raw` back onto its grid.
pub fn read_field_raw(path: &Path, grid: &Grid<f64>) -> Result<ScalarField<f64>> {
    let mut r = BufReader::new(open_for_read(path)?);
    let (d0, d1, sp) = read_header(&mut r)?;
    if d0 as usize != grid.n_per_side() || d1 as usize != grid.n_per_side() {
        return Err(Error::Shape(format!(
            "field file is {d0}x{d1}, grid wants {0}x{0}",
            grid.n_per_side()
        )));
    }
    if (sp - grid.spacing()).abs() > 1e-12 * grid.spacing() {
        return Err(Error::Shape(
            "field file spacing does not match the grid".into(),
        ));
    }
    let values = read_values(&mut r, (d0 * d1) as usize)?;
    ScalarField::from_values(grid, values)
}

/// Time-major trace with the time step in the header.
pub fn write_trace_raw(path: &Path, trace: &BoundaryTrace<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(
        &mut w,
        trace.n_steps() as u64,
        trace.n_points() as u64,
        trace.dt(),
    )?;
    write_values(&mut w, trace.values())?;
    w.flush()?;
    Ok(())
}

pub fn read_trace_raw(
    path: &Path,
    param: &BoundaryParametrization<f64>,
) -> Result<BoundaryTrace<f64>> {
    let mut r = BufReader::new(open_for_read(path)?);
    let (steps, points, dt) = read_header(&mut r)?;
    if points as usize != param.n_points() {
        return Err(Error::Shape(format!(
            "trace file has {points} boundary points, expected {}",
            param.n_points()
        )));
    }
    let values = read_values(&mut r, (steps * points) as usize)?;
    BoundaryTrace::from_values(param, steps as usize, dt, values)
}

/// CSV with one sample per line: `time,angle_index,value`.
pub fn write_trace_csv(path: &Path, trace: &BoundaryTrace<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time,angle_index,value")?;
    for step in 0..trace.n_steps() {
        let t = trace.dt() * step as f64;
        for (k, v) in trace.row(step).iter().enumerate() {
            writeln!(w, "{t:.9e},{k},{v:.12e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Column-major dense matrix with `(rows, cols)` in the header.
pub fn write_matrix_raw(path: &Path, m: &DenseMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, m.rows() as u64, m.cols() as u64, 0.0)?;
    write_values(&mut w, m.data())?;
    w.flush()?;
    Ok(())
}

/// 8-bit binary PGM preview, values mapped linearly from `[lo, hi]`.
/// Pass `None` to use the field's own range.
pub fn write_pgm(path: &Path, field: &ScalarField<f64>, range: Option<(f64, f64)>) -> Result<()> {
    let n = field.grid().n_per_side();
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = field
            .values()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{n} {n}\n255\n")?;
    let mut bytes = Vec::with_capacity(n * n);
    // image rows run top to bottom
    for j in (0..n).rev() {
        for i in 0..n {
            let v = ((field.at(i, j) - lo) / span).clamp(0.0, 1.0);
            bytes.push((v * 255.0).round() as u8);
        }
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}
