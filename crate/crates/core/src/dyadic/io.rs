//! Grid-function persistence: a one-line JSON header followed by raw
//! little-endian f64 cell values, plus CSV for inspection.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::{Grid, GridFunction};
use crate::error::{invalid, Result};

pub const GRID_SCHEMA: &str = "dyadic-bloom/grid/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub schema: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub depth: u32,
    pub role: String,
}

pub fn write_binary<W: Write>(mut w: W, f: &GridFunction, role: &str) -> Result<()> {
    let header = GridHeader {
        schema: GRID_SCHEMA.to_string(),
        n: f.grid().n,
        depth: f.grid().depth,
        role: role.to_string(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(r: R) -> Result<(GridHeader, GridFunction)> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: GridHeader = serde_json::from_str(line.trim_end())?;
    if header.schema != GRID_SCHEMA {
        return Err(invalid(format!(
            "unsupported grid schema {:?}",
            header.schema
        )));
    }
    let grid = Grid::new(header.n, header.depth)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.cell_count() * 8 {
        return Err(invalid(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            grid.cell_count() * 8
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, GridFunction::new(grid, values)?))
}

/// CSV with columns `i,value` (n = 1) or `i,j,value` (n = 2).
pub fn write_csv<W: Write>(mut w: W, f: &GridFunction) -> Result<()> {
    let g = f.grid();
    if g.n == 1 {
        writeln!(w, "i,value")?;
    } else {
        writeln!(w, "i,j,value")?;
    }
    for (c, v) in f.values().iter().enumerate() {
        let [i, j] = g.coords(c);
        if g.n == 1 {
            writeln!(w, "{i},{v:e}")?;
        } else {
            writeln!(w, "{i},{j},{v:e}")?;
        }
    }
    Ok(())
}

pub fn read_csv<R: Read>(r: R, grid: Grid) -> Result<GridFunction> {
    let mut values = vec![f64::NAN; grid.cell_count()];
    for (lineno, line) in BufReader::new(r).lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || invalid(format!("malformed CSV line {}", lineno + 1));
        if fields.len() != grid.n + 1 {
            return Err(bad());
        }
        let mut coords = [0usize; 2];
        for a in 0..grid.n {
            coords[a] = fields[a].parse().map_err(|_| bad())?;
            if coords[a] >= grid.side_cells() {
                return Err(bad());
            }
        }
        values[grid.flat(coords)] = fields[grid.n].parse().map_err(|_| bad())?;
    }
    GridFunction::new(grid, values)
}
