//! Ask/tell/recommend black-box optimization: a portfolio of continuous and
//! discrete solvers, composition operators, and a rule-based wizard that picks
//! an algorithm from a-priori problem features.
//!
//! ```
//! use abbo_core::{run_loop, AlgorithmSpec, DomainSpec, FnObjective, RunContext};
//!
//! let ctx = RunContext::new(DomainSpec::continuous(3).unwrap(), 200, 1, false, 42).unwrap();
//! let spec: AlgorithmSpec = "abbo".parse().unwrap();
//! let mut sphere = FnObjective(|p: &[abbo_core::Value]| p.iter().map(|v| v.as_f64().powi(2)).sum());
//! let outcome = run_loop(&spec, &mut sphere, &ctx).unwrap();
//! assert_eq!(outcome.history.len(), 200);
//! ```

pub mod build;
pub mod combinators;
pub mod discrete;
pub mod error;
pub mod optimizer;
pub mod run;
pub mod seed;
pub mod solvers;
pub mod space;
pub mod spec;
pub mod wizard;

pub use build::{build_optimizer, known_solvers, validate_spec};
pub use error::{Error, Result};
pub use optimizer::{Candidate, Encoding, OptimizerHandle, Recommendation, RecommendationSource, RunContext, Solver};
pub use run::{drive, run_loop, EvalError, FnObjective, History, Objective, RunError, RunOutcome};
pub use seed::{derive_seed, Label};
pub use space::{DomainSpec, Point, SearchBox, Value, VariableKind, VariableSpec};
pub use spec::{split_top_level, AlgorithmSpec, WrapKind};
pub use wizard::{select_algorithm, SelectionContext};
