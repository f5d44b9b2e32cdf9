//! Experiment harness: runs algorithm × suite × seed grids, stores
//! schema-versioned records, and derives normalized-loss curves, pairwise
//! winning-rate heatmaps and rankings.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod protocol;
pub mod records;
pub mod report;

pub use error::HarnessError;
pub use experiment::{cell_seed, parse_algorithms, run_cell_on, run_experiment, Experiment};
pub use protocol::{run_external, ExternalEvaluator, ExternalRun, Message};
pub use records::{checkpoint_grid, load_records, Checkpoint, ExperimentRecord, RECORD_SCHEMA_VERSION};
pub use report::{curves, emit_reports, normalize, winning_rates, CurvePoint, Heatmap};
