use std::io::Write;
use std::path::Path;

use fredholm::Grid;

use crate::error::BenchError;
use crate::run::RunRecord;

pub const CSV_HEADER: [&str; 8] = [
    "method",
    "param_summary",
    "delta",
    "rel_error",
    "residual",
    "iterations",
    "wall_ms",
    "converged",
];

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> BenchError + '_ {
    move |e| BenchError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> BenchError + '_ {
    move |e| BenchError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes the records as CSV. Floats use Rust's shortest round-trip
/// scientific form, so the text depends only on the values.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.method.clone(),
            r.param_summary.clone(),
            format!("{:e}", r.delta),
            opt(r.rel_error),
            opt(r.residual),
            r.iterations.to_string(),
            opt(r.wall_ms),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_csv(records, file).map_err(csv_err(path))
}

/// Two-column `x,value` file of solution samples on `grid`.
pub fn emit_profile(values: &[f64], grid: &Grid<f64>, path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(["x", "value"]).map_err(csv_err(path))?;
    for (x, v) in grid.nodes().iter().zip(values) {
        w.write_record([format!("{x:e}"), format!("{v:e}")]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
