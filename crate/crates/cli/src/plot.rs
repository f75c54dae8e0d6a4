use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::report::RunReport;

/// Writes `<dir>/<name>.csv` for one series of the report.
pub fn write_series(report: &RunReport, name: &str, dir: &Path) -> Result<PathBuf> {
    let Some(series) = report.series.get(name) else {
        bail!("report of `{}` has no series `{name}`", report.command);
    };
    let path = dir.join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(&series.columns)?;
    for row in &series.rows {
        if row.len() != series.columns.len() {
            bail!("series `{name}`: row of {} values under {} columns", row.len(), series.columns.len());
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(path)
}

/// Every series of the report, in name order. A command without plot data is
/// an error.
pub fn emit_plotdata(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.series.is_empty() {
        bail!("`{}` produces no plot series", report.command);
    }
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    report.series.keys().map(|name| write_series(report, name, dir)).collect()
}
