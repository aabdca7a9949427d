//! CSV reports with a JSON sidecar holding metadata and per-program curves.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::convergence::{ConvergenceReport, ConvergenceRow};

pub const CSV_HEADER: [&str; 6] = ["n", "trials", "successes", "p_hat", "ci_lo", "ci_hi"];

/// `report.csv` → `report.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// The CSV body. Floats use the shortest representation that parses back
/// to the same value.
pub fn render_csv(rows: &[ConvergenceRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(csv_fields(r))?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

/// Writes `path` (CSV) and its sidecar (the full report as JSON).
pub fn export_report(report: &ConvergenceReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_csv(&report.rows)?).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

/// Reads a report back. The CSV rows must agree with the sidecar.
pub fn read_report(path: impl AsRef<Path>) -> Result<ConvergenceReport> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let report: ConvergenceReport = serde_json::from_str(&text)?;
    let rows = read_csv_rows(path)?;
    let expected: Vec<[String; 6]> = report.rows.iter().map(csv_fields).collect();
    if rows != expected {
        return Err(Error::Config(format!(
            "{} disagrees with {}",
            path.display(),
            side.display()
        )));
    }
    Ok(report)
}

fn csv_fields(r: &ConvergenceRow) -> [String; 6] {
    [
        r.n.to_string(),
        r.trials.to_string(),
        r.successes.to_string(),
        r.p_hat.to_string(),
        r.ci_lo.to_string(),
        r.ci_hi.to_string(),
    ]
}

/// Raw CSV rows under the fixed header.
pub fn read_csv_rows(path: &Path) -> Result<Vec<[String; 6]>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.display())));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let fields: Vec<String> = rec.iter().map(str::to_string).collect();
            fields
                .try_into()
                .map_err(|_| Error::Config(format!("{}: row with wrong arity", path.display())))
        })
        .collect()
}
