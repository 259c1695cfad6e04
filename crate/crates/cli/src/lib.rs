//! Batch front-end for the `shadow` binary: JSON experiment configs, scenario
//! runners and report files.

pub mod config;
pub mod run;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use shadow_core::diffraction::PurePointMeasure;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{run, Command, Report, RunError};

/// Coordinate used on the horizontal axis of a peak plot: `ξ₁` itself in one
/// dimension, `|ξ₁|` otherwise.
fn plot_coordinate(xi1: &[f64]) -> f64 {
    match xi1 {
        [x] => *x,
        _ => xi1.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Writes two whitespace-separated columns `coordinate intensity`, sorted by
/// coordinate (stable, so ties keep the measure's label order).
pub fn emit_plot_data(peaks: &PurePointMeasure, path: &Path) -> std::io::Result<()> {
    let mut rows: Vec<(f64, f64)> = peaks.atoms.iter().map(|a| (plot_coordinate(a.xi1()), a.intensity)).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = BufWriter::new(File::create(path)?);
    let axis = if peaks.atoms.first().is_some_and(|a| a.xi1().len() > 1) { "orbit_radius" } else { "xi1" };
    writeln!(w, "# {axis} intensity")?;
    for (x, y) in rows {
        writeln!(w, "{x:.16e} {y:.16e}")?;
    }
    w.flush()
}

/// Reads a file written by [`emit_plot_data`].
pub fn read_plot_data(path: &Path) -> std::io::Result<Vec<(f64, f64)>> {
    let bad = |line: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad plot row: {line}"));
    let mut rows = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<f64>);
        match (it.next(), it.next()) {
            (Some(Ok(x)), Some(Ok(y))) => rows.push((x, y)),
            _ => return Err(bad(&line)),
        }
    }
    Ok(rows)
}
