//! Field snapshot files.
//!
//! Format: one header line
//!
//! ```text
//! epidiff-field v1; dim=<1|2>; cells=<nx>[,<ny>]; spacing=<hx>[,<hy>]; species=<name>; time=<t>
//! ```
//!
//! followed by one ASCII value per cell in row-major order. All floats are
//! written with 17 significant digits, so a write/read round trip is
//! bit-exact.

use crate::grid::{Field, Grid};
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("snapshot header malformed: {0}")]
    BadHeader(String),
    #[error("snapshot value line {line} malformed: {text:?}")]
    BadValue { line: usize, text: String },
    #[error("snapshot has {got} values but the grid has {expected} cells")]
    WrongLength { got: usize, expected: usize },
    #[error("snapshot grid is invalid: {0}")]
    BadGrid(String),
}

/// A field together with its label and time stamp.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub species: String,
    pub time: f64,
}

pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<(), SnapshotError> {
    let grid = snap.field.grid();
    let [nx, ny] = grid.cells();
    let [hx, hy] = grid.spacing();
    let cells = if grid.dim() == 2 {
        format!("{nx},{ny}")
    } else {
        format!("{nx}")
    };
    let spacing = if grid.dim() == 2 {
        format!("{hx:.16e},{hy:.16e}")
    } else {
        format!("{hx:.16e}")
    };
    writeln!(
        w,
        "epidiff-field v1; dim={}; cells={}; spacing={}; species={}; time={:.16e}",
        grid.dim(),
        cells,
        spacing,
        snap.species,
        snap.time
    )?;
    for &v in snap.field.values() {
        if !v.is_finite() {
            return Err(SnapshotError::BadGrid(format!(
                "refusing to write non-finite value {v}"
            )));
        }
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Snapshot, SnapshotError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| SnapshotError::BadHeader("empty file".into()))??;
    let mut parts = header.split(';').map(str::trim);
    let magic = parts
        .next()
        .ok_or_else(|| SnapshotError::BadHeader("missing magic".into()))?;
    if magic != "epidiff-field v1" {
        return Err(SnapshotError::BadHeader(format!(
            "unexpected magic {magic:?}"
        )));
    }
    let mut dim = None;
    let mut cells: Option<Vec<usize>> = None;
    let mut spacing: Option<Vec<f64>> = None;
    let mut species = None;
    let mut time = None;
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| SnapshotError::BadHeader(format!("bad segment {part:?}")))?;
        match key {
            "dim" => {
                dim = Some(value.parse::<usize>().map_err(|_| {
                    SnapshotError::BadHeader(format!("bad dim {value:?}"))
                })?)
            }
            "cells" => {
                let parsed: Result<Vec<usize>, _> =
                    value.split(',').map(|v| v.trim().parse()).collect();
                cells = Some(parsed.map_err(|_| {
                    SnapshotError::BadHeader(format!("bad cells {value:?}"))
                })?);
            }
            "spacing" => {
                let parsed: Result<Vec<f64>, _> =
                    value.split(',').map(|v| v.trim().parse()).collect();
                spacing = Some(parsed.map_err(|_| {
                    SnapshotError::BadHeader(format!("bad spacing {value:?}"))
                })?);
            }
            "species" => species = Some(value.to_string()),
            "time" => {
                time = Some(value.parse::<f64>().map_err(|_| {
                    SnapshotError::BadHeader(format!("bad time {value:?}"))
                })?)
            }
            other => {
                return Err(SnapshotError::BadHeader(format!(
                    "unknown header key {other:?}"
                )))
            }
        }
    }
    let dim = dim.ok_or_else(|| SnapshotError::BadHeader("missing dim".into()))?;
    let cells = cells.ok_or_else(|| SnapshotError::BadHeader("missing cells".into()))?;
    let spacing = spacing.ok_or_else(|| SnapshotError::BadHeader("missing spacing".into()))?;
    let species = species.ok_or_else(|| SnapshotError::BadHeader("missing species".into()))?;
    let time = time.ok_or_else(|| SnapshotError::BadHeader("missing time".into()))?;
    if cells.len() != dim || spacing.len() != dim {
        return Err(SnapshotError::BadHeader(format!(
            "dim {dim} does not match cells/spacing arity"
        )));
    }

    // Reconstruct the grid from cells and spacing; extents = n * h.
    let grid = if dim == 1 {
        Grid::line(spacing[0] * cells[0] as f64, cells[0])
    } else {
        Grid::rect(
            [spacing[0] * cells[0] as f64, spacing[1] * cells[1] as f64],
            [cells[0], cells[1]],
        )
    }
    .map_err(|e| SnapshotError::BadGrid(e.to_string()))?;

    let mut values = Vec::with_capacity(grid.n_cells());
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text.parse().map_err(|_| SnapshotError::BadValue {
            line: idx + 2,
            text: text.to_string(),
        })?;
        values.push(v);
    }
    if values.len() != grid.n_cells() {
        return Err(SnapshotError::WrongLength {
            got: values.len(),
            expected: grid.n_cells(),
        });
    }
    Ok(Snapshot {
        field: Field::from_values(grid, values),
        species,
        time,
    })
}

/// Writes a snapshot to a file path.
pub fn save_snapshot(path: &std::path::Path, snap: &Snapshot) -> Result<(), SnapshotError> {
    let file = std::fs::File::create(path)?;
    write_snapshot(io::BufWriter::new(file), snap)
}

/// Reads a snapshot from a file path.
pub fn load_snapshot(path: &std::path::Path) -> Result<Snapshot, SnapshotError> {
    let file = std::fs::File::open(path)?;
    read_snapshot(io::BufReader::new(file))
}
