//! Normalized-loss curves, winning-rate heatmaps, rankings and report files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::records::{to_jsonl, ExperimentRecord};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CURVES_FILE: &str = "curves.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const RANKING_FILE: &str = "ranking.txt";

/// A configuration shared by competing algorithms.
pub type CellKey = (String, usize, usize);

fn key(r: &ExperimentRecord) -> CellKey {
    (r.problem.clone(), r.budget, r.num_workers)
}

/// Min-max rescaling to `[0, 1]`; a constant group maps to all zeros.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect()
}

/// Mean final regret over seeds for every (configuration, algorithm) with
/// at least one completed run.
pub fn cell_means(records: &[ExperimentRecord]) -> BTreeMap<CellKey, BTreeMap<String, f64>> {
    let mut sums: BTreeMap<CellKey, BTreeMap<String, (f64, usize)>> = BTreeMap::new();
    for r in records {
        if let Some(regret) = r.final_regret() {
            let e = sums.entry(key(r)).or_default().entry(r.algorithm.clone()).or_insert((0.0, 0));
            e.0 += regret;
            e.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(k, algs)| (k, algs.into_iter().map(|(a, (s, n))| (a, s / n as f64)).collect()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub problem: String,
    pub algorithm: String,
    pub budget: usize,
    pub num_workers: usize,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// Mean and standard deviation over seeds of the normalized final loss,
/// normalized within each configuration across algorithms and seeds.
pub fn curves(records: &[ExperimentRecord]) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<CellKey, Vec<(&str, f64)>> = BTreeMap::new();
    for r in records {
        if let Some(regret) = r.final_regret() {
            groups.entry(key(r)).or_default().push((&r.algorithm, regret));
        }
    }
    let mut per_alg: BTreeMap<(String, String, usize, usize), Vec<f64>> = BTreeMap::new();
    for ((problem, budget, workers), entries) in groups {
        let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
        for ((alg, _), v) in entries.iter().zip(normalize(&values)) {
            per_alg.entry((problem.clone(), alg.to_string(), budget, workers)).or_default().push(v);
        }
    }
    per_alg
        .into_iter()
        .map(|((problem, algorithm, budget, num_workers), vs)| {
            let n = vs.len() as f64;
            let mean = vs.iter().sum::<f64>() / n;
            let std = if vs.len() > 1 { (vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
            CurvePoint { problem, algorithm, budget, num_workers, mean, std, runs: vs.len() }
        })
        .collect()
}

/// Pairwise winning frequencies, rows and columns in ranking order.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub algorithms: Vec<String>,
    /// `matrix[i][j]`: frequency at which algorithm `i` beats `j`; `None`
    /// when the pair shares no configuration.
    pub matrix: Vec<Vec<Option<f64>>>,
    /// Mean of each row excluding the diagonal and missing pairs.
    pub scores: Vec<Option<f64>>,
}

impl Heatmap {
    pub fn get(&self, x: &str, y: &str) -> Option<f64> {
        let i = self.algorithms.iter().position(|a| a == x)?;
        let j = self.algorithms.iter().position(|a| a == y)?;
        self.matrix[i][j]
    }

    pub fn score(&self, x: &str) -> Option<f64> {
        self.scores[self.algorithms.iter().position(|a| a == x)?]
    }

    /// 1-based rank of `x`.
    pub fn rank(&self, x: &str) -> Option<usize> {
        self.algorithms.iter().position(|a| a == x).map(|i| i + 1)
    }
}

/// Compares mean final regrets per configuration: a strictly lower mean is a
/// win, equal means give half a win to each side.
pub fn winning_rates(records: &[ExperimentRecord]) -> Heatmap {
    let means = cell_means(records);
    let ids: Vec<String> = records.iter().map(|r| r.algorithm.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let n = ids.len();
    let mut matrix = vec![vec![None; n]; n];
    for i in 0..n {
        matrix[i][i] = Some(0.5);
        for j in 0..n {
            if i == j {
                continue;
            }
            let (mut wins, mut shared) = (0.0, 0usize);
            for algs in means.values() {
                if let (Some(x), Some(y)) = (algs.get(&ids[i]), algs.get(&ids[j])) {
                    shared += 1;
                    if x < y {
                        wins += 1.0;
                    } else if x == y {
                        wins += 0.5;
                    }
                }
            }
            if shared > 0 {
                matrix[i][j] = Some(wins / shared as f64);
            }
        }
    }
    let scores: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..n).filter(|&j| j != i).filter_map(|j| matrix[i][j]).collect();
            (!row.is_empty()).then(|| row.iter().sum::<f64>() / row.len() as f64)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let by_score = match (scores[a], scores[b]) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        by_score.then_with(|| ids[a].cmp(&ids[b]))
    });
    Heatmap {
        algorithms: order.iter().map(|&i| ids[i].clone()).collect(),
        matrix: order.iter().map(|&i| order.iter().map(|&j| matrix[i][j]).collect()).collect(),
        scores: order.iter().map(|&i| scores[i]).collect(),
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_else(|| "NA".into())
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn curves_csv(records: &[ExperimentRecord]) -> String {
    let header = ["problem", "algorithm", "budget", "num_workers", "mean_normalized_loss", "std_normalized_loss", "runs"];
    let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for c in curves(records) {
        rows.push(vec![
            c.problem,
            c.algorithm,
            c.budget.to_string(),
            c.num_workers.to_string(),
            format_float(c.mean),
            format_float(c.std),
            c.runs.to_string(),
        ]);
    }
    csv_text(rows)
}

pub fn heatmap_csv(heatmap: &Heatmap) -> String {
    let mut header = vec!["algorithm".to_string()];
    header.extend(heatmap.algorithms.iter().cloned());
    let mut rows = vec![header];
    for (alg, row) in heatmap.algorithms.iter().zip(&heatmap.matrix) {
        let mut line = vec![alg.clone()];
        line.extend(row.iter().map(|v| format_opt(*v)));
        rows.push(line);
    }
    csv_text(rows)
}

pub fn ranking_text(heatmap: &Heatmap) -> String {
    heatmap
        .algorithms
        .iter()
        .zip(&heatmap.scores)
        .enumerate()
        .map(|(i, (alg, score))| format!("{}\t{}\t{}\n", i + 1, format_opt(*score), alg))
        .collect()
}

/// Writes records.jsonl, curves.csv, heatmap.csv and ranking.txt into
/// `out_dir`, returning the written paths.
pub fn emit_reports(records: &[ExperimentRecord], out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Empty);
    }
    let heatmap = winning_rates(records);
    let files = [
        (RECORDS_FILE, to_jsonl(records)),
        (CURVES_FILE, curves_csv(records)),
        (HEATMAP_FILE, heatmap_csv(&heatmap)),
        (RANKING_FILE, ranking_text(&heatmap)),
    ];
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    files
        .into_iter()
        .map(|(name, content)| {
            let path = out_dir.join(name);
            std::fs::write(&path, content).map_err(|e| HarnessError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
