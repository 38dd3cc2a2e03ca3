//! Field and trajectory serialization.
//!
//! Binary field layout "GRSH1": the 5 magic bytes, then 64-bit little-endian
//! integers [N, k, points per x-axis (N entries), points per y-axis (k
//! entries)], then the samples as 64-bit floats in row-major (x-major,
//! y-minor) order. Grid extents travel in the run manifest, not the payload.
//!
//! CSV fields carry one index column per axis followed by the value; CSV uses
//! '.' decimals, ',' separators and a mandatory header row.

use crate::error::{GrushinError, Result};
use crate::grid::{Field, Grid};
use crate::solver::SolveReport;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 5] = b"GRSH1";

pub fn write_field_binary(path: &Path, field: &Field) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.x_dims as u64).to_le_bytes())?;
    w.write_all(&(grid.y_dims as u64).to_le_bytes())?;
    for _ in 0..grid.x_dims {
        w.write_all(&(grid.x_points as u64).to_le_bytes())?;
    }
    for _ in 0..grid.y_dims {
        w.write_all(&(grid.y_points as u64).to_le_bytes())?;
    }
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_binary(path: &Path, grid: &Grid) -> Result<Field> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(GrushinError::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let mut u64buf = [0u8; 8];
    let mut read_u64 = |r: &mut BufReader<std::fs::File>| -> Result<u64> {
        r.read_exact(&mut u64buf)?;
        Ok(u64::from_le_bytes(u64buf))
    };
    let x_dims = read_u64(&mut r)? as usize;
    let y_dims = read_u64(&mut r)? as usize;
    if x_dims != grid.x_dims || y_dims != grid.y_dims {
        return Err(GrushinError::GridMismatch(format!(
            "file is ({x_dims}, {y_dims})-dimensional, grid is ({}, {})",
            grid.x_dims, grid.y_dims
        )));
    }
    for _ in 0..x_dims {
        let pts = read_u64(&mut r)? as usize;
        if pts != grid.x_points {
            return Err(GrushinError::GridMismatch(format!(
                "file has {pts} x-points per axis, grid has {}",
                grid.x_points
            )));
        }
    }
    for _ in 0..y_dims {
        let pts = read_u64(&mut r)? as usize;
        if pts != grid.y_points {
            return Err(GrushinError::GridMismatch(format!(
                "file has {pts} y-points per axis, grid has {}",
                grid.y_points
            )));
        }
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut f64buf = [0u8; 8];
    for _ in 0..grid.len() {
        r.read_exact(&mut f64buf)?;
        values.push(f64::from_le_bytes(f64buf));
    }
    Field::from_values(*grid, values)
}

fn csv_header(grid: &Grid) -> String {
    let mut cols = Vec::new();
    for i in 0..grid.x_dims {
        cols.push(format!("ix{i}"));
    }
    for i in 0..grid.y_dims {
        cols.push(format!("iy{i}"));
    }
    cols.push("value".into());
    cols.join(",")
}

pub fn write_field_csv(path: &Path, field: &Field) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", csv_header(grid))?;
    let yc = grid.y_count();
    for (flat, v) in field.values().iter().enumerate() {
        let mut ix = flat / yc;
        let mut iy = flat % yc;
        let mut idx = vec![0usize; grid.x_dims + grid.y_dims];
        for a in (0..grid.x_dims).rev() {
            idx[a] = ix % grid.x_points;
            ix /= grid.x_points;
        }
        for a in (0..grid.y_dims).rev() {
            idx[grid.x_dims + a] = iy % grid.y_points;
            iy /= grid.y_points;
        }
        for i in idx {
            write!(w, "{i},")?;
        }
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_csv(path: &Path, grid: &Grid) -> Result<Field> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| GrushinError::Format("empty csv".into()))??;
    if header.trim() != csv_header(grid) {
        return Err(GrushinError::Format(format!(
            "csv header '{header}' does not match grid layout '{}'",
            csv_header(grid)
        )));
    }
    let mut values = vec![0.0; grid.len()];
    let mut seen = 0usize;
    let yc = grid.y_count();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != grid.x_dims + grid.y_dims + 1 {
            return Err(GrushinError::Format(format!("bad csv row '{line}'")));
        }
        let mut ix = 0usize;
        for c in &cells[..grid.x_dims] {
            let i: usize = c
                .trim()
                .parse()
                .map_err(|_| GrushinError::Format(format!("bad index '{c}'")))?;
            if i >= grid.x_points {
                return Err(GrushinError::Format(format!("x index {i} out of range")));
            }
            ix = ix * grid.x_points + i;
        }
        let mut iy = 0usize;
        for c in &cells[grid.x_dims..grid.x_dims + grid.y_dims] {
            let i: usize = c
                .trim()
                .parse()
                .map_err(|_| GrushinError::Format(format!("bad index '{c}'")))?;
            if i >= grid.y_points {
                return Err(GrushinError::Format(format!("y index {i} out of range")));
            }
            iy = iy * grid.y_points + i;
        }
        let v: f64 = cells[grid.x_dims + grid.y_dims]
            .trim()
            .parse()
            .map_err(|_| GrushinError::Format("bad value".into()))?;
        values[ix * yc + iy] = v;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(GrushinError::Format(format!(
            "csv has {seen} samples, grid needs {}",
            grid.len()
        )));
    }
    Field::from_values(*grid, values)
}

/// Norm trajectories as CSV: t, lp_norm, lrhop_norm, weighted_norm, residual.
pub fn write_trajectory_csv(path: &Path, report: &SolveReport) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "t,lp_norm,lrhop_norm,weighted_norm,residual")?;
    for i in 0..report.times.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            report.times[i],
            report.lp_norms[i],
            report.lrhop_norms[i],
            report.weighted_norms[i],
            report.final_increment_norms[i],
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gaussian_bump;

    #[test]
    fn binary_round_trip_is_exact() {
        let grid = Grid::new(1, 1, 4.0, 8, 4.0, 8).unwrap();
        let f = gaussian_bump(grid, 1.3, 0.8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.grsh");
        write_field_binary(&path, &f).unwrap();
        let g = read_field_binary(&path, &grid).unwrap();
        assert_eq!(f.values(), g.values());
    }

    #[test]
    fn binary_rejects_bad_magic_and_wrong_grid() {
        let grid = Grid::new(1, 1, 4.0, 8, 4.0, 8).unwrap();
        let f = gaussian_bump(grid, 1.0, 0.8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.grsh");
        write_field_binary(&path, &f).unwrap();

        let other = Grid::new(1, 1, 4.0, 16, 4.0, 8).unwrap();
        assert!(matches!(
            read_field_binary(&path, &other),
            Err(GrushinError::GridMismatch(_))
        ));

        std::fs::write(&path, b"NOPE!rest").unwrap();
        assert!(matches!(read_field_binary(&path, &grid), Err(GrushinError::Format(_))));
    }

    #[test]
    fn csv_round_trip_matches_to_display_precision() {
        let grid = Grid::new(1, 1, 4.0, 8, 4.0, 8).unwrap();
        let f = gaussian_bump(grid, 0.9, 1.1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        write_field_csv(&path, &f).unwrap();
        let g = read_field_csv(&path, &grid).unwrap();
        // shortest-roundtrip float formatting reproduces the bits
        assert_eq!(f.values(), g.values());
    }
}
