//! Experiment records and their line-delimited JSON form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub evaluations: usize,
    pub regret: f64,
}

/// Outcome of one (problem, budget, workers, algorithm, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub suite: String,
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub budget: usize,
    pub num_workers: usize,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Regret at the full budget, for completed cells.
    pub fn final_regret(&self) -> Option<f64> {
        if self.failed() {
            return None;
        }
        self.checkpoints.last().filter(|c| c.evaluations == self.budget).map(|c| c.regret)
    }
}

/// Checkpoint grid `{ceil(b / 2^k)} ∪ {b}`, increasing.
pub fn checkpoint_grid(budget: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let c = budget.div_ceil(1usize << k.min(63));
        if grid.last() != Some(&c) {
            grid.push(c);
        }
        if c <= 1 {
            break;
        }
        k += 1;
    }
    grid.reverse();
    grid
}

pub fn to_jsonl(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<ExperimentRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let record: ExperimentRecord =
                serde_json::from_str(line).map_err(|e| HarnessError::Records(format!("line {}: {e}", i + 1)))?;
            if record.schema_version != RECORD_SCHEMA_VERSION {
                return Err(HarnessError::Records(format!(
                    "line {}: schema version {} (expected {RECORD_SCHEMA_VERSION})",
                    i + 1,
                    record.schema_version
                )));
            }
            Ok(record)
        })
        .collect()
}

/// Reads `records.jsonl` from a directory, or the given file.
pub fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let file = if path.is_dir() { path.join(crate::report::RECORDS_FILE) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(|e| HarnessError::io(&file, e))?;
    parse_jsonl(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(checkpoint_grid(1), vec![1]);
        assert_eq!(checkpoint_grid(10), vec![1, 2, 3, 5, 10]);
        assert_eq!(checkpoint_grid(8), vec![1, 2, 4, 8]);
        for b in 1..300 {
            let g = checkpoint_grid(b);
            assert!(g.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(*g.last().unwrap(), b);
        }
    }

    #[test]
    fn schema_version_is_checked() {
        let line = r#"{"schema_version":2,"suite":"s","problem":"p","algorithm":"cma","seed":0,"budget":1,"num_workers":1,"checkpoints":[]}"#;
        assert!(matches!(parse_jsonl(line), Err(HarnessError::Records(_))));
    }
}
