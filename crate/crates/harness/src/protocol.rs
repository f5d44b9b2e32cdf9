//! Line-delimited JSON protocol for objectives living in a child process.
//!
//! The child first prints a hello message declaring its domain, then answers
//! every eval request with a loss carrying the same id:
//!
//! ```text
//! child  → {"type":"hello","dimension":3}
//! parent → {"type":"eval","id":0,"point":[0.5,-1.0,2.0]}
//! child  → {"type":"loss","id":0,"value":5.25}
//! ```
//!
//! `variables` in the hello message is optional and lists variable kinds in
//! the same form as domain manifests; without it the domain is `dimension`
//! unbounded reals.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use abbo_core::{AlgorithmSpec, DomainSpec, EvalError, Objective, RunContext, Value, VariableKind};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::experiment::{cell_seed, score_snapshots, trajectory};
use crate::records::{ExperimentRecord, RECORD_SCHEMA_VERSION};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
/// Suite and problem name used in records of external runs.
pub const EXTERNAL: &str = "external";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Hello {
        dimension: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variables: Option<Vec<VariableKind>>,
    },
    Eval {
        id: u64,
        point: Vec<f64>,
    },
    Loss {
        id: u64,
        value: f64,
    },
}

/// A child process wrapped as an [`Objective`].
pub struct ExternalEvaluator {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    timeout: Duration,
    domain: DomainSpec,
    next_id: u64,
    broken: Option<String>,
}

impl ExternalEvaluator {
    /// Starts `command` through `sh -c` and waits for its hello message.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, HarnessError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| HarnessError::Protocol(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut session =
            Self { child, stdin, lines, timeout, domain: DomainSpec::continuous(1).expect("valid"), next_id: 0, broken: None };
        match session.receive() {
            Ok(Message::Hello { dimension, variables }) => {
                let kinds = variables.unwrap_or_else(|| vec![VariableKind::real(); dimension]);
                if kinds.len() != dimension {
                    return Err(HarnessError::Protocol(format!(
                        "hello declares dimension {dimension} but lists {} variables",
                        kinds.len()
                    )));
                }
                session.domain = DomainSpec::new(kinds).map_err(|e| HarnessError::Protocol(e.to_string()))?;
                Ok(session)
            }
            Ok(other) => Err(HarnessError::Protocol(format!("expected hello, got {other:?}"))),
            Err(e) => Err(HarnessError::Protocol(e)),
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn receive(&mut self) -> Result<Message, String> {
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(left) {
                Ok(line) => line,
                Err(RecvTimeoutError::Timeout) => return Err(format!("no reply within {:?}", self.timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err("evaluator process exited".into()),
            };
            if line.trim().is_empty() {
                continue;
            }
            return serde_json::from_str(&line).map_err(|e| format!("malformed message `{line}`: {e}"));
        }
    }

    fn request(&mut self, point: &[Value]) -> Result<f64, String> {
        let id = self.next_id;
        self.next_id += 1;
        let message = Message::Eval { id, point: point.iter().map(Value::as_f64).collect() };
        let line = serde_json::to_string(&message).expect("message serializes");
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| format!("cannot write to evaluator: {e}"))?;
        match self.receive()? {
            Message::Loss { id: got, value } if got == id => Ok(value),
            Message::Loss { id: got, .. } => Err(format!("reply id {got} does not match request id {id}")),
            other => Err(format!("expected loss, got {other:?}")),
        }
    }
}

impl Objective for ExternalEvaluator {
    fn evaluate(&mut self, point: &[Value]) -> Result<f64, EvalError> {
        if let Some(reason) = &self.broken {
            return Err(EvalError(format!("protocol error: {reason}")));
        }
        self.request(point).map_err(|reason| {
            self.broken = Some(reason.clone());
            EvalError(format!("protocol error: {reason}"))
        })
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Debug, Clone)]
pub struct ExternalRun {
    pub command: String,
    pub algorithms: Vec<AlgorithmSpec>,
    pub seeds: Vec<u64>,
    pub budget: usize,
    pub num_workers: usize,
    pub noisy: bool,
    pub master_seed: u64,
    pub timeout: Duration,
}

/// Runs every (algorithm, seed) cell against a fresh child process. Regret
/// is the child's loss at the recommendation, evaluated outside the budget.
pub fn run_external(run: &ExternalRun) -> Vec<ExperimentRecord> {
    let mut records = Vec::new();
    for algorithm in &run.algorithms {
        for &seed in &run.seeds {
            let text = algorithm.to_string();
            let (checkpoints, failure) = match ExternalEvaluator::spawn(&run.command, run.timeout) {
                Ok(mut evaluator) => {
                    let optimizer_seed = cell_seed(run.master_seed, EXTERNAL, EXTERNAL, &text, seed);
                    match RunContext::new(evaluator.domain().clone(), run.budget, run.num_workers, run.noisy, optimizer_seed) {
                        Ok(ctx) => {
                            let (snapshots, failure) = trajectory(algorithm, &ctx, &mut evaluator);
                            score_snapshots(snapshots, failure, |p| evaluator.evaluate(p).map_err(|e| e.0))
                        }
                        Err(e) => (Vec::new(), Some(e.to_string())),
                    }
                }
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            records.push(ExperimentRecord {
                schema_version: RECORD_SCHEMA_VERSION,
                suite: EXTERNAL.into(),
                problem: EXTERNAL.into(),
                algorithm: text,
                seed,
                budget: run.budget,
                num_workers: run.num_workers,
                checkpoints,
                failure,
                wall_time_ms: None,
            });
        }
    }
    records
}
