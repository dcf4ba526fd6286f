//! Field snapshot files: a one-line header
//! `torus dim=<d> n=<n1>[,<n2>] L=<L1>[,<L2>]` followed by node values,
//! one per line in row-major order at full double precision.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{ScalarField, TorusGrid};

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn write_snapshot(w: &mut impl Write, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let n = grid
        .shape()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let l = grid
        .period()
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",");
    writeln!(w, "torus dim={} n={} L={}", grid.dim(), n, l)?;
    for v in field.values() {
        writeln!(w, "{}", fmt_f64(*v))?;
    }
    Ok(())
}

pub fn write_snapshot_file(path: &std::path::Path, field: &ScalarField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(&mut f, field)
}

pub fn read_snapshot(r: impl Read) -> Result<ScalarField> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::SnapshotParse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header?;
    let grid = parse_header(&header)?;

    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|e| Error::SnapshotParse {
            line: i + 1,
            message: format!("bad value: {e}"),
        })?;
        values.push(v);
    }
    ScalarField::from_values(&grid, values)
}

pub fn read_snapshot_file(path: &std::path::Path) -> Result<ScalarField> {
    read_snapshot(std::fs::File::open(path)?)
}

fn parse_header(header: &str) -> Result<Arc<TorusGrid>> {
    let bad = |message: String| Error::SnapshotParse { line: 1, message };
    let mut dim: Option<usize> = None;
    let mut n: Vec<usize> = Vec::new();
    let mut l: Vec<f64> = Vec::new();

    let mut parts = header.split_whitespace();
    if parts.next() != Some("torus") {
        return Err(bad("expected header to start with 'torus'".into()));
    }
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
        match key {
            "dim" => {
                dim = Some(value.parse().map_err(|e| bad(format!("bad dim: {e}")))?)
            }
            "n" => {
                for tok in value.split(',') {
                    n.push(tok.parse().map_err(|e| bad(format!("bad n: {e}")))?);
                }
            }
            "L" => {
                for tok in value.split(',') {
                    l.push(tok.parse().map_err(|e| bad(format!("bad L: {e}")))?);
                }
            }
            other => return Err(bad(format!("unknown header key '{other}'"))),
        }
    }
    let dim = dim.ok_or_else(|| bad("missing dim".into()))?;
    if n.len() != dim || l.len() != dim {
        return Err(bad(format!(
            "dim={dim} but n has {} entries and L has {}",
            n.len(),
            l.len()
        )));
    }
    TorusGrid::new(&n, &l)
}
