//! Composite solvers: sequential chaining, bet-and-run selection and
//! progressive activation of coordinates.

pub mod bet_and_run;
pub mod chain;
pub mod progressive;

pub use bet_and_run::{phase_budgets, BetAndRun};
pub use chain::{allocate_budgets, Chain};
pub use progressive::{active_coordinates, Progressive};
