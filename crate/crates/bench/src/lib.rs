//! Benchmark instances: base functions, random transforms, partially
//! separable composites, discrete problems and the named suites built from
//! them.
//!
//! ```
//! use abbo_bench::{make_function, FunctionSpec, TransformSpec};
//! use abbo_core::Value;
//!
//! let f = make_function(&FunctionSpec::new("sphere", 3, TransformSpec::translated(1.0, 7))).unwrap();
//! let optimum = f.optimum_point().unwrap();
//! assert_eq!(f.noise_free(&optimum), 0.0);
//! assert!(f.noise_free(&[Value::Real(10.0); 3]) > 0.0);
//! ```

pub mod functions;
pub mod lsgo;
pub mod problem;
pub mod suites;
pub mod transform;
pub mod tsp;

use thiserror::Error;

pub use functions::BaseFunction;
pub use lsgo::{lsgo_composite, LsgoLayout};
pub use problem::{make_function, BlockSpec, Evaluator, Function, FunctionSpec};
pub use suites::{BenchmarkSuite, SuiteProblem, MANIFEST_FORMAT_VERSION, SUITE_NAMES};
pub use transform::{Transform, TransformSpec};
pub use tsp::simple_tsp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
}
