//! Running (problem × budget × workers × algorithm × seed) cells.

use std::time::Instant;

use abbo_bench::{make_function, BenchmarkSuite, SuiteProblem};
use abbo_core::{
    build_optimizer, derive_seed, drive, split_top_level, validate_spec, AlgorithmSpec, Objective, RunContext, Value,
};
use rayon::prelude::*;

use crate::error::HarnessError;
use crate::records::{checkpoint_grid, Checkpoint, ExperimentRecord, RECORD_SCHEMA_VERSION};

/// Parses a comma-separated list of algorithm specs (commas nested inside
/// parentheses or brackets belong to the spec) and validates each one.
pub fn parse_algorithms(list: &str) -> Result<Vec<AlgorithmSpec>, HarnessError> {
    let items: Vec<String> = split_top_level(list).into_iter().filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(HarnessError::Usage("no algorithms given".into()));
    }
    items
        .into_iter()
        .map(|text| {
            let spec: AlgorithmSpec =
                text.parse().map_err(|source| HarnessError::Algorithm { spec: text.clone(), source })?;
            validate_spec(&spec).map_err(|source| HarnessError::Algorithm { spec: text.clone(), source })?;
            Ok(spec)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub suite: BenchmarkSuite,
    pub algorithms: Vec<AlgorithmSpec>,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub record_timing: bool,
}

/// Seed of one cell's optimizer.
pub fn cell_seed(master_seed: u64, suite: &str, problem: &str, algorithm: &str, seed: u64) -> u64 {
    derive_seed(master_seed, &[suite.into(), problem.into(), algorithm.into(), seed.into()])
}

struct Cell<'a> {
    problem: &'a SuiteProblem,
    budget: usize,
    num_workers: usize,
    algorithm: &'a AlgorithmSpec,
    seed: u64,
}

/// Runs every cell of `experiment` on the rayon pool. Cell failures are
/// recorded in the returned records; only invalid inputs are errors.
pub fn run_experiment(experiment: &Experiment) -> Result<Vec<ExperimentRecord>, HarnessError> {
    experiment.suite.validate()?;
    for spec in &experiment.algorithms {
        validate_spec(spec).map_err(|source| HarnessError::Algorithm { spec: spec.to_string(), source })?;
    }
    let mut cells = Vec::new();
    for problem in &experiment.suite.problems {
        for &budget in &problem.budgets {
            for &num_workers in &problem.num_workers {
                for algorithm in &experiment.algorithms {
                    for &seed in &experiment.seeds {
                        cells.push(Cell { problem, budget, num_workers, algorithm, seed });
                    }
                }
            }
        }
    }
    Ok(cells.par_iter().map(|cell| run_cell(experiment, cell)).collect())
}

fn run_cell(experiment: &Experiment, cell: &Cell<'_>) -> ExperimentRecord {
    let started = Instant::now();
    let suite = experiment.suite.name.as_str();
    let algorithm = cell.algorithm.to_string();
    let seed = cell_seed(experiment.master_seed, suite, &cell.problem.id, &algorithm, cell.seed);
    let instance = cell.problem.instance(suite, experiment.master_seed, cell.seed);
    let (checkpoints, failure) = match make_function(&instance) {
        Ok(function) => match RunContext::new(function.domain().clone(), cell.budget, cell.num_workers, function.is_noisy(), seed) {
            Ok(ctx) => {
                let mut evaluator = function.evaluator(derive_seed(seed, &["noise".into()]));
                run_cell_on(cell.algorithm, &ctx, &mut evaluator, |p| Ok(function.regret(p)))
            }
            Err(e) => (Vec::new(), Some(e.to_string())),
        },
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    if let Some(reason) = &failure {
        log::warn!("{suite}/{} b={} w={} {algorithm} seed {}: {reason}", cell.problem.id, cell.budget, cell.num_workers, cell.seed);
    }
    ExperimentRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        suite: suite.to_string(),
        problem: cell.problem.id.clone(),
        algorithm,
        seed: cell.seed,
        budget: cell.budget,
        num_workers: cell.num_workers,
        checkpoints,
        failure,
        wall_time_ms: experiment.record_timing.then(|| started.elapsed().as_millis() as u64),
    }
}

/// Recommendations taken at the checkpoint grid while `algorithm` spends the
/// budget of `ctx` on `objective`, and the failure reason, if any.
pub fn trajectory(
    algorithm: &AlgorithmSpec,
    ctx: &RunContext,
    objective: &mut dyn Objective,
) -> (Vec<(usize, Vec<Value>)>, Option<String>) {
    let mut handle = match build_optimizer(algorithm, ctx) {
        Ok(h) => h,
        Err(e) => return (Vec::new(), Some(e.to_string())),
    };
    let grid = checkpoint_grid(ctx.budget);
    let mut next = 0;
    let mut snapshots = Vec::with_capacity(grid.len());
    let outcome = drive(&mut handle, objective, |tells, h| {
        if next < grid.len() && tells == grid[next] {
            snapshots.push((tells, h.recommend().point));
            next += 1;
        }
    });
    (snapshots, outcome.err().map(|e| e.to_string()))
}

/// Scores snapshots in order, stopping at the first failure.
pub fn score_snapshots(
    snapshots: Vec<(usize, Vec<Value>)>,
    mut failure: Option<String>,
    mut score: impl FnMut(&[Value]) -> Result<f64, String>,
) -> (Vec<Checkpoint>, Option<String>) {
    let mut checkpoints = Vec::with_capacity(snapshots.len());
    for (evaluations, point) in snapshots {
        match score(&point) {
            Ok(regret) if regret.is_finite() => checkpoints.push(Checkpoint { evaluations, regret }),
            Ok(regret) => {
                failure.get_or_insert_with(|| format!("non-finite regret {regret} at {evaluations} evaluations"));
                break;
            }
            Err(e) => {
                failure.get_or_insert(e);
                break;
            }
        }
    }
    (checkpoints, failure)
}

/// Runs `algorithm` on `objective` for the whole budget of `ctx` and scores
/// the recommendation at every checkpoint.
pub fn run_cell_on(
    algorithm: &AlgorithmSpec,
    ctx: &RunContext,
    objective: &mut dyn Objective,
    score: impl FnMut(&[Value]) -> Result<f64, String>,
) -> (Vec<Checkpoint>, Option<String>) {
    let (snapshots, failure) = trajectory(algorithm, ctx, objective);
    score_snapshots(snapshots, failure, score)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_lists_split_at_top_level() {
        let algs = parse_algorithms("cma, chain(cma,powell;0.5,0.5),diagonal-cma[asks=10]").unwrap();
        assert_eq!(algs.len(), 3);
        assert_eq!(algs[1].to_string(), "chain(cma,powell;0.5,0.5)");
        assert!(matches!(parse_algorithms("cma,cmaa"), Err(HarnessError::Algorithm { .. })));
        assert!(parse_algorithms(" , ").is_err());
    }
}
