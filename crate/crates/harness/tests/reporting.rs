use std::collections::BTreeSet;

use optbench::records::{parse_jsonl, to_jsonl};
use optbench::report::{heatmap_csv, RANKING_FILE, RECORDS_FILE};
use optbench::{emit_reports, load_records, normalize, winning_rates, Checkpoint, ExperimentRecord, HarnessError, RECORD_SCHEMA_VERSION};
use proptest::prelude::*;

fn record(problem: usize, budget: usize, alg: usize, seed: u64, regret: f64) -> ExperimentRecord {
    ExperimentRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        suite: "fuzz".into(),
        problem: format!("p{problem}"),
        algorithm: format!("alg,{alg}"),
        seed,
        budget,
        num_workers: 1,
        checkpoints: vec![Checkpoint { evaluations: budget / 2, regret: regret * 2.0 }, Checkpoint { evaluations: budget, regret }],
        failure: None,
        wall_time_ms: None,
    }
}

/// One seed per (problem, budget, algorithm); some cells left out.
fn single_seed_records() -> impl Strategy<Value = Vec<ExperimentRecord>> {
    (2usize..6, 1usize..4).prop_flat_map(|(algs, problems)| {
        proptest::collection::vec((any::<bool>(), 0u8..5, -3i32..3), algs * problems * 2).prop_map(move |cells| {
            let mut out = Vec::new();
            for (k, (keep, mantissa, exponent)) in cells.into_iter().enumerate() {
                let (alg, rest) = (k % algs, k / algs);
                let (problem, budget) = (rest % problems, [10, 100][rest / problems]);
                if keep || alg < 2 {
                    out.push(record(problem, budget, alg, 0, mantissa as f64 * 10f64.powi(exponent)));
                }
            }
            out
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn heatmap_is_a_winning_frequency_table(records in single_seed_records()) {
        let h = winning_rates(&records);
        let n = h.algorithms.len();
        for i in 0..n {
            prop_assert_eq!(h.matrix[i][i], Some(0.5));
            for j in 0..n {
                match (h.matrix[i][j], h.matrix[j][i]) {
                    (Some(x), Some(y)) => {
                        prop_assert!((0.0..=1.0).contains(&x));
                        prop_assert!((x + y - 1.0).abs() < 1e-12);
                    }
                    (None, None) => {}
                    _ => prop_assert!(false, "one-sided missing pair"),
                }
            }
        }
    }

    #[test]
    fn heatmap_ignores_monotone_transforms(records in single_seed_records(), scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let transformed: Vec<ExperimentRecord> = records
            .iter()
            .map(|r| {
                let mut r = r.clone();
                for c in &mut r.checkpoints {
                    c.regret = scale * c.regret.sqrt() + shift;
                }
                r
            })
            .collect();
        prop_assert_eq!(winning_rates(&records), winning_rates(&transformed));
    }

    #[test]
    fn ranking_is_a_permutation_invariant_under_relabeling(records in single_seed_records()) {
        let h = winning_rates(&records);
        let ids: BTreeSet<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
        prop_assert_eq!(h.algorithms.len(), ids.len());
        prop_assert_eq!(h.algorithms.iter().map(String::as_str).collect::<BTreeSet<_>>(), ids);
        // Reversing the record order changes nothing.
        let reversed: Vec<ExperimentRecord> = records.iter().rev().cloned().collect();
        prop_assert_eq!(&winning_rates(&reversed), &h);
        // Renaming algorithms keeps every score attached to the same algorithm.
        let renamed: Vec<ExperimentRecord> = records
            .iter()
            .map(|r| ExperimentRecord { algorithm: format!("z{}", r.algorithm.len() * 31 % 7) + &r.algorithm, ..r.clone() })
            .collect();
        let h2 = winning_rates(&renamed);
        for a in &h.algorithms {
            let new_name = format!("z{}", a.len() * 31 % 7) + a;
            prop_assert_eq!(h.score(a), h2.score(&new_name));
        }
    }

    #[test]
    fn normalized_values_span_unit_interval(values in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
        let n = normalize(&values);
        prop_assert!(n.iter().all(|v| (0.0..=1.0).contains(v)));
        if values.iter().any(|v| *v != values[0]) {
            prop_assert!(n.contains(&0.0) && n.contains(&1.0));
        }
    }

    #[test]
    fn records_round_trip_through_disk(records in single_seed_records()) {
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&records, dir.path()).unwrap();
        prop_assert_eq!(load_records(dir.path()).unwrap(), records.clone());
        prop_assert_eq!(load_records(&dir.path().join(RECORDS_FILE)).unwrap(), records.clone());
        prop_assert_eq!(parse_jsonl(&to_jsonl(&records)).unwrap(), records);
    }
}

#[test]
fn empty_records_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    assert!(matches!(emit_reports(&[], &out), Err(HarnessError::Empty)));
    assert!(!out.exists());
}

#[test]
fn heatmap_file_is_square_and_ordered_like_the_ranking() {
    let records: Vec<ExperimentRecord> =
        (0..4).flat_map(|a| (0..3).map(move |p| record(p, 100, a, 0, ((a * 7 + p * 3) % 5) as f64))).collect();
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&records, dir.path()).unwrap();
    let h = winning_rates(&records);
    let text = heatmap_csv(&h);
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.len() == 5));
    let ranking = std::fs::read_to_string(dir.path().join(RANKING_FILE)).unwrap();
    let ranked: Vec<&str> = ranking.lines().map(|l| l.splitn(3, '\t').nth(2).unwrap()).collect();
    let header: Vec<&str> = rows[0].iter().skip(1).collect();
    let first_column: Vec<&str> = rows[1..].iter().map(|r| &r[0]).collect();
    assert_eq!(header, ranked);
    assert_eq!(first_column, ranked);
    assert!(ranked.iter().all(|a| a.contains(',')));
}

#[test]
fn mixed_schema_versions_are_rejected() {
    let mut r = record(0, 10, 0, 0, 1.0);
    r.schema_version = RECORD_SCHEMA_VERSION + 1;
    assert!(parse_jsonl(&to_jsonl(&[r])).is_err());
}
