//! JSON run reports.

use std::collections::BTreeMap;

use serde::Serialize;
use wedderburn::Matrix;

/// One report per run. Field order and key order (`BTreeMap`) are fixed, so
/// two runs with the same inputs and seed differ only in `wall_time_ms`.
#[derive(Debug, Clone, Serialize)]
pub struct JsonReport {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub rng: &'static str,
    pub input_shapes: BTreeMap<String, [usize; 2]>,
    pub ranks: BTreeMap<String, usize>,
    pub k: Option<usize>,
    /// Every entry is a norm or a count, hence non-negative.
    pub residuals: BTreeMap<String, f64>,
    /// Bound each asserted residual was checked against.
    pub bounds: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub singular_values: Option<Vec<f64>>,
    pub wall_time_ms: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl JsonReport {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            rng: wedderburn::sketch::GENERATOR,
            input_shapes: BTreeMap::new(),
            ranks: BTreeMap::new(),
            k: None,
            residuals: BTreeMap::new(),
            bounds: BTreeMap::new(),
            counts: BTreeMap::new(),
            singular_values: None,
            wall_time_ms: 0.0,
            passed: true,
            notes: Vec::new(),
        }
    }

    pub fn shape(&mut self, name: &str, m: &Matrix) {
        self.input_shapes.insert(name.into(), [m.rows(), m.cols()]);
    }

    pub fn rank(&mut self, name: &str, r: usize) {
        self.ranks.insert(name.into(), r);
    }

    /// Records a residual without asserting it.
    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.into(), value);
    }

    /// Records a residual and fails the run when it exceeds `bound`.
    pub fn assert_within(&mut self, name: &str, value: f64, bound: f64) {
        self.residual(name, value);
        self.bounds.insert(name.into(), bound);
        if !(value <= bound) {
            self.fail(format!("{name} = {value:e} exceeds {bound:e}"));
        }
    }

    pub fn count(&mut self, name: &str, n: u64) {
        self.counts.insert(name.into(), n);
    }

    pub fn fail(&mut self, note: impl Into<String>) {
        self.passed = false;
        self.notes.push(note.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        let mut r = JsonReport::new("x", 0);
        r.assert_within("r", f64::NAN, 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn floats_use_shortest_round_trip() {
        let mut r = JsonReport::new("x", 0);
        r.residual("a", 0.1);
        assert!(r.to_json().contains("\"a\": 0.1\n"));
    }
}
