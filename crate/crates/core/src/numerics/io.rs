//! Field serialization: a human-readable CSV form and a compact
//! little-endian binary form. Both round-trip bit-exactly for finite
//! values.
//!
//! Binary layout: `u32 n`, `u32 dim`, then `n^dim` pairs of `f64`
//! (re, im), all little-endian.

use super::field::Field;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Writes `index,real,imag` rows with a header line.
pub fn write_field_csv(path: &Path, f: &Field) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "index,real,imag")?;
    for (i, z) in f.data().iter().enumerate() {
        writeln!(w, "{i},{:.17e},{:.17e}", z.re, z.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_field_csv`]. The grid shape is supplied
/// by the caller and validated against the row count.
pub fn read_field_csv(path: &Path, grid: TorusGrid) -> Result<Field> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut data = Vec::with_capacity(grid.len());
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "index,real,imag" {
                return Err(Error::Config(format!(
                    "bad CSV header in {}: {line:?}",
                    path.display()
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.trim().parse::<f64>().ok()).ok_or_else(|| {
                Error::Config(format!(
                    "bad CSV row {lineno} in {}: {line:?}",
                    path.display()
                ))
            })
        };
        let _index = parse(parts.next())?;
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        data.push(Complex64::new(re, im));
    }
    if data.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "CSV {} has {} samples, grid expects {}",
            path.display(),
            data.len(),
            grid.len()
        )));
    }
    Field::from_data(grid, data)
}

/// Writes the compact binary form.
pub fn write_field_binary(path: &Path, f: &Field) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(&(f.grid().n() as u32).to_le_bytes())?;
    w.write_all(&(f.grid().dim() as u32).to_le_bytes())?;
    for z in f.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the compact binary form; the grid shape comes from the header.
pub fn read_field_binary(path: &Path) -> Result<Field> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let dim = u32::from_le_bytes(u32buf) as usize;
    let grid = TorusGrid::new(n, dim)?;
    let mut data = Vec::with_capacity(grid.len());
    let mut f64buf = [0u8; 8];
    for _ in 0..grid.len() {
        r.read_exact(&mut f64buf)?;
        let re = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let im = f64::from_le_bytes(f64buf);
        data.push(Complex64::new(re, im));
    }
    Field::from_data(grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, dim: usize) -> Field {
        let grid = TorusGrid::new(n, dim).unwrap();
        match dim {
            1 => Field::from_fn_1d(grid, |y| {
                Complex64::new(y.sin(), (2.0 * y).cos())
            }),
            _ => Field::from_fn_2d(grid, |x, y| {
                Complex64::new(x.cos() * y.sin(), x - y)
            }),
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = sample(32, 1);
        write_field_csv(&path, &f).unwrap();
        let g = read_field_csv(&path, f.grid()).unwrap();
        for (a, b) in f.data().iter().zip(g.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let f = sample(16, 2);
        write_field_binary(&path, &f).unwrap();
        let g = read_field_binary(&path).unwrap();
        assert_eq!(f.grid(), g.grid());
        for (a, b) in f.data().iter().zip(g.data()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_rejects_wrong_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = sample(32, 1);
        write_field_csv(&path, &f).unwrap();
        let wrong = TorusGrid::new(64, 1).unwrap();
        assert!(read_field_csv(&path, wrong).is_err());
    }
}
