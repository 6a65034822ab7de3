//! Experiment harness for `chronoevo-core`: JSON configs, parallel
//! evaluation, resumable grids, noise experiments, trace export and
//! statistics tables.

pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod parallel;
pub mod presets;
pub mod stats;
pub mod trace;

pub use config::{Condition, Encoding, GridConfig};
pub use error::{Error, Result};
pub use grid::{run_grid, CellResult, GridOutcome, RunOptions, TrialRecord};
pub use parallel::ParallelEvaluator;
