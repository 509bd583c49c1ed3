//! CSV and JSON artifacts. Floats are written with 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use upwind_core::analysis::MarginRow;
use upwind_core::geometry::GridFunction;

use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), source: e })
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<PathBuf> {
    let io = |e: csv::Error| CliError::Input { path: path.display().to_string(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    Ok(path.to_path_buf())
}

/// `t,x,u` (1D) or `t,x,y,u` (2D), one row per cell.
pub fn write_solution(path: &Path, u: &GridFunction) -> CliResult<PathBuf> {
    let two = u.grid.dim() == 2;
    let header: &[&str] = if two { &["t", "x", "y", "u"] } else { &["t", "x", "u"] };
    let rows = u.grid.centers().into_iter().zip(&u.values).map(|(c, &v)| {
        let mut r = vec![num(u.t), num(c[0])];
        if two {
            r.push(num(c[1]));
        }
        r.push(num(v));
        r
    });
    write_csv(path, header, rows)
}

pub fn write_margins(path: &Path, rows: &[MarginRow]) -> CliResult<PathBuf> {
    write_csv(
        path,
        &["estimate_id", "t", "lhs", "rhs", "slack"],
        rows.iter().map(|r| vec![r.id.clone(), num(r.t), num(r.lhs), num(r.rhs), num(r.slack)]),
    )
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<PathBuf> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    fs::write(path, text + "\n").map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    Ok(path.to_path_buf())
}
