use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};

/// Numeric table written to `rows.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV text with a header, `\n` line endings and 17 significant digits.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
    }
}

/// One named pass/fail condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub seed: u64,
    pub table: Table,
    pub fitted_slope: Option<f64>,
    pub halfwidth: Option<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    /// Conditions beyond the slope target.
    pub checks: Vec<Check>,
    /// Replications whose estimator returned an error.
    pub failures: usize,
    pub details: serde_json::Value,
}

impl ExperimentReport {
    /// Slope within tolerance and every check passing; `None` when nothing
    /// was declared.
    pub fn pass(&self) -> Option<bool> {
        let slope = match (self.fitted_slope, self.target, self.tolerance) {
            (Some(s), Some(t), Some(tol)) => Some((s - t).abs() <= tol),
            (None, Some(_), Some(_)) => Some(false),
            _ => None,
        };
        let checks = (!self.checks.is_empty()).then(|| self.checks.iter().all(|c| c.pass));
        match (slope, checks) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(true) && b.unwrap_or(true)),
        }
    }
}

impl Serialize for Experiment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `rows.csv`, `summary.json` and `resolved_config.txt` into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, report: &ExperimentReport, wall_time_seconds: f64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let rows = dir.join("rows.csv");
    std::fs::write(&rows, report.table.to_csv()?).map_err(io_err(&rows))?;

    let summary = dir.join("summary.json");
    let json = serde_json::json!({
        "experiment": report.experiment.as_str(),
        "seed": report.seed,
        "fitted_slope": report.fitted_slope,
        "halfwidth": report.halfwidth,
        "target": report.target,
        "tolerance": report.tolerance,
        "pass": report.pass(),
        "wall_time_seconds": wall_time_seconds,
        "failures": report.failures,
        "checks": report.checks,
        "details": report.details,
    });
    let mut f = std::fs::File::create(&summary).map_err(io_err(&summary))?;
    serde_json::to_writer_pretty(&mut f, &json)?;
    f.write_all(b"\n").map_err(io_err(&summary))?;

    let resolved = dir.join("resolved_config.txt");
    std::fs::write(&resolved, config.to_text()).map_err(io_err(&resolved))?;
    Ok(vec![rows, summary, resolved])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_stable() {
        let mut t = Table::new(&["n", "err"]);
        t.push(vec![128.0, 0.1]);
        t.push(vec![256.0, 1.0 / 3.0]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(
            text,
            "n,err\n1.2800000000000000e2,1.0000000000000001e-1\n2.5600000000000000e2,3.3333333333333331e-1\n"
        );
        assert_eq!(t.column("err").unwrap()[0], 0.1);
    }

    #[test]
    fn pass_logic() {
        let mut r = ExperimentReport {
            experiment: Experiment::RateSweep,
            seed: 1,
            table: Table::new(&["n"]),
            fitted_slope: Some(-0.45),
            halfwidth: Some(0.01),
            target: Some(-0.5),
            tolerance: Some(0.08),
            checks: vec![],
            failures: 0,
            details: serde_json::Value::Null,
        };
        assert_eq!(r.pass(), Some(true));
        r.checks.push(Check::new("x", false, ""));
        assert_eq!(r.pass(), Some(false));
        r.checks.clear();
        r.target = None;
        assert_eq!(r.pass(), None);
    }
}
