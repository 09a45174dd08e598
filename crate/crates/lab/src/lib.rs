//! Experiment harness for `manet-core`: scenario files, sweeps over one
//! parameter with replications, CSV results and aggregate tables.

pub mod report;
pub mod scenario_file;
pub mod sweep;

pub use report::{aggregate, read_csv, write_csv, AggregateTable, ResultRow};
pub use scenario_file::{parse_file, parse_scenario, render, ScenarioError};
pub use sweep::{run_sweep, Axis, SweepPlan};
