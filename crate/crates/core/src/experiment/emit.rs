//! CSV and JSON writers for result tables and run traces.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ResultTable;
use crate::engine::RunTrace;
use crate::error::{Error, Result};

/// Fixed column order of the results CSV.
pub const CSV_COLUMNS: [&str; 12] = [
    "scenario",
    "n",
    "lambda",
    "chi",
    "c",
    "selection",
    "seed",
    "outcome",
    "evaluations",
    "best_fitness",
    "min_zero_bits",
    "wall_ms",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// One line per row in the fixed column order; an empty table gives a
/// header-only file.
pub fn write_csv(table: &ResultTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(CSV_COLUMNS)?;
    for r in &table.rows {
        w.write_record([
            r.scenario.clone(),
            r.n.to_string(),
            r.lambda.to_string(),
            r.chi.to_string(),
            r.c.map(|c| c.to_string()).unwrap_or_default(),
            r.selection.clone(),
            r.seed.to_string(),
            r.outcome.as_str().to_string(),
            r.evaluations.to_string(),
            r.best_fitness.to_string(),
            r.min_zero_bits.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn write_json(table: &ResultTable, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, table)?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_json(path: &Path) -> Result<ResultTable> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

/// Header of a trace CSV; one `beta@γ` column per γ of the run.
pub fn trace_csv_header(trace: &RunTrace) -> Vec<String> {
    let mut h: Vec<String> = ["t", "best_f", "mean_f", "Z_t", "min_zero_bits"].map(String::from).to_vec();
    if let Some(first) = trace.records.first() {
        h.extend(first.beta.iter().map(|b| format!("beta@{}", b.gamma)));
    }
    h.push("fallback_flag".into());
    h
}

pub fn write_trace_csv(trace: &RunTrace, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(trace_csv_header(trace))?;
    for r in &trace.records {
        let mut rec = vec![
            r.t.to_string(),
            r.best_fitness.to_string(),
            r.mean_fitness.to_string(),
            r.deficit.to_string(),
            r.min_zero_bits.to_string(),
        ];
        rec.extend(r.beta.iter().map(|b| b.beta.to_string()));
        rec.push((r.fallback as u8).to_string());
        w.write_record(rec)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
