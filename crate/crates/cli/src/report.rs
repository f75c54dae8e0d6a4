use std::collections::BTreeMap;

use serde::Serialize;

/// One row of the residual table.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Absent for informational rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub pass: bool,
}

/// Columns of numbers for `--plot-dir`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 over the arguments (minus output paths) and input file bytes.
    pub inputs_digest: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub residuals: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub series: BTreeMap<String, Series>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        RunReport {
            command: command.to_string(),
            inputs_digest: String::new(),
            seed,
            tolerances: BTreeMap::new(),
            residuals: Vec::new(),
            pass: true,
            error: None,
            notes: Vec::new(),
            artifacts: Vec::new(),
            wall_time_ms: 0.0,
            series: BTreeMap::new(),
        }
    }

    /// `value ≤ tol`. NaN fails.
    pub fn check_le(&mut self, name: &str, value: f64, tol: f64) -> bool {
        let pass = value <= tol;
        self.push(name, value, Some(tol), pass)
    }

    /// `value ≥ −tol`.
    pub fn check_ge(&mut self, name: &str, value: f64, tol: f64) -> bool {
        let pass = value >= -tol;
        self.push(name, value, Some(tol), pass)
    }

    pub fn check_flag(&mut self, name: &str, ok: bool) -> bool {
        self.push(name, if ok { 1.0 } else { 0.0 }, None, ok)
    }

    pub fn info(&mut self, name: &str, value: f64) {
        self.residuals.push(Check { name: name.to_string(), value, tol: None, pass: true });
    }

    fn push(&mut self, name: &str, value: f64, tol: Option<f64>, pass: bool) -> bool {
        self.residuals.push(Check { name: name.to_string(), value, tol, pass });
        self.pass &= pass;
        pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.residuals.iter().filter(|c| !c.pass)
    }

    pub fn add_series(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.series.insert(name.to_string(), Series { columns: columns.iter().map(|c| c.to_string()).collect(), rows });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_check_clears_pass() {
        let mut r = RunReport::new("x", 0);
        assert!(r.check_le("a", 1e-12, 1e-10));
        r.info("b", 5.0);
        assert!(r.pass);
        assert!(!r.check_ge("c", -0.5, 1e-10));
        assert!(!r.pass);
        assert!(!r.check_le("nan", f64::NAN, 1.0));
        assert_eq!(r.failures().count(), 2);
    }
}
