//! Driving a handle against an objective in parallel waves.

use thiserror::Error;

use crate::build::build_optimizer;
use crate::error::Error;
use crate::optimizer::{OptimizerHandle, Recommendation, RunContext};
use crate::space::Value;
use crate::spec::AlgorithmSpec;

/// Failure reported by an objective.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct EvalError(pub String);

/// Something that maps domain points to losses.
pub trait Objective {
    fn evaluate(&mut self, point: &[Value]) -> Result<f64, EvalError>;
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[Value]) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, point: &[Value]) -> Result<f64, EvalError> {
        Ok((self.0)(point))
    }
}

/// One `(evaluation index, loss)` pair, indices starting at 1.
pub type History = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub recommendation: Recommendation,
    pub history: History,
}

#[derive(Debug, Clone, Error)]
pub enum RunError {
    #[error("cannot build optimizer: {0}")]
    Build(Error),
    #[error("evaluation {} failed: {source}", .history.len() + 1)]
    Evaluation { source: EvalError, history: History },
    #[error("optimizer contract error: {source}")]
    Optimizer { source: Error, history: History },
}

impl RunError {
    /// Evaluations completed before the failure.
    pub fn partial_history(&self) -> &[(usize, f64)] {
        match self {
            RunError::Build(_) => &[],
            RunError::Evaluation { history, .. } | RunError::Optimizer { history, .. } => history,
        }
    }
}

/// Builds `algorithm` for `context` and spends the whole budget on `function`.
pub fn run_loop(
    algorithm: &AlgorithmSpec,
    function: &mut dyn Objective,
    context: &RunContext,
) -> Result<RunOutcome, RunError> {
    let mut handle = build_optimizer(algorithm, context).map_err(RunError::Build)?;
    drive(&mut handle, function, |_, _| {})
}

/// Runs an existing handle to the end of its budget.
///
/// Asks are issued in waves of `min(num_workers, remaining)`; every candidate
/// of a wave is evaluated and told before the next wave. `observer` is called
/// after each tell with the number of tells so far.
pub fn drive(
    handle: &mut OptimizerHandle,
    function: &mut dyn Objective,
    mut observer: impl FnMut(usize, &OptimizerHandle),
) -> Result<RunOutcome, RunError> {
    let mut history = History::with_capacity(handle.budget());
    while handle.asks() < handle.budget() {
        let wave = handle.num_workers().min(handle.budget() - handle.asks());
        let mut candidates = Vec::with_capacity(wave);
        for _ in 0..wave {
            match handle.ask() {
                Ok(c) => candidates.push(c),
                Err(source) => return Err(RunError::Optimizer { source, history }),
            }
        }
        for candidate in &candidates {
            let loss = match function.evaluate(&candidate.point) {
                Ok(loss) => loss,
                Err(source) => return Err(RunError::Evaluation { source, history }),
            };
            if let Err(source) = handle.tell(candidate, loss) {
                return Err(RunError::Optimizer { source, history });
            }
            history.push((history.len() + 1, loss));
            observer(handle.tells(), handle);
        }
    }
    Ok(RunOutcome { recommendation: handle.recommend(), history })
}
