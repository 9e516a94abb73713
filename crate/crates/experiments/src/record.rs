//! Machine-readable summary of a run, written as `record.json`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use twodisk::images::SeriesReport;

use crate::config::ExperimentConfig;

/// Maps non-finite values to `None` so that JSON round-trips exactly.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub terms: [usize; 2],
    pub last_relative_term: [Option<f64>; 2],
    pub tail_ratio: [Option<f64>; 2],
    pub tail_estimate: [Option<f64>; 2],
    pub truncated: bool,
}

impl From<&SeriesReport> for SeriesRecord {
    fn from(r: &SeriesReport) -> Self {
        Self {
            terms: r.terms,
            last_relative_term: r.last_relative_term.map(finite),
            tail_ratio: r.tail_ratio.map(finite),
            tail_estimate: r.tail_estimate.map(finite),
            truncated: r.truncated,
        }
    }
}

/// Outputs of one sweep entry, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub eps: f64,
    pub m: usize,
    pub outputs: BTreeMap<String, Option<f64>>,
    pub series: Option<SeriesRecord>,
    pub seconds: f64,
}

impl EntryRecord {
    pub fn new(eps: f64, m: usize) -> Self {
        Self {
            eps,
            m,
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.outputs.insert(key.to_owned(), finite(value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.outputs.get(key).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub index: usize,
    pub eps: f64,
    pub m: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub inputs: ExperimentConfig,
    pub entries: Vec<EntryRecord>,
    pub failures: Vec<FailureRecord>,
    pub warnings: Vec<String>,
    pub seconds: f64,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_become_null() {
        let mut e = EntryRecord::new(0.1, 16);
        e.set("a", f64::NAN);
        e.set("b", 0.1 + 0.2);
        assert_eq!(e.get("a"), None);
        assert_eq!(e.get("b"), Some(0.1 + 0.2));
    }
}
