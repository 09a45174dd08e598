//! Parameter sweeps: one run per (axis value, protocol, replication).

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use manet_core::{run_one, MetricsRow, ProtocolKind, Scenario};

use crate::scenario_file::{parse_protocol, ScenarioError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Rate,
    Pause,
    NNodes,
    Protocol,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Rate => "rate",
            Axis::Pause => "pause",
            Axis::NNodes => "n_nodes",
            Axis::Protocol => "protocol",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rate" => Ok(Axis::Rate),
            "pause" => Ok(Axis::Pause),
            "n_nodes" => Ok(Axis::NNodes),
            "protocol" => Ok(Axis::Protocol),
            _ => Err(format!("unknown axis `{s}` (expected rate, pause, n_nodes or protocol)")),
        }
    }
}

/// Default packet-rate grid for load sweeps, in packets per second.
pub const DEFAULT_RATES: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 25.0];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub base: Scenario,
    pub axis: Axis,
    /// Axis values as written; parsed per axis by [`SweepPlan::cells`].
    pub values: Vec<String>,
    pub replications: u32,
    /// Protocols run in every cell. Ignored on the protocol axis.
    pub protocols: Vec<ProtocolKind>,
}

/// One run of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub axis_value: String,
    pub replication: u32,
    pub scenario: Scenario,
}

impl SweepPlan {
    /// Expands the plan into concrete scenarios. Replication `i` uses seed
    /// `base.seed + i`, the same for every protocol and axis value.
    pub fn cells(&self) -> Result<Vec<Cell>, ScenarioError> {
        if self.replications == 0 {
            return Err(ScenarioError::Validation { field: "reps".into(), reason: "must be at least 1".into() });
        }
        if self.values.is_empty() {
            return Err(ScenarioError::Validation { field: "values".into(), reason: "no axis values given".into() });
        }
        let bad = |v: &str| ScenarioError::Validation {
            field: self.axis.name().into(),
            reason: format!("cannot use `{v}` as a {} value", self.axis),
        };
        let mut cells = Vec::new();
        for value in &self.values {
            let mut variant = self.base.clone();
            let protocols = match self.axis {
                Axis::Rate => {
                    variant.rate = value.parse().map_err(|_| bad(value))?;
                    self.protocols.clone()
                }
                Axis::Pause => {
                    variant.pause = value.parse().map_err(|_| bad(value))?;
                    self.protocols.clone()
                }
                Axis::NNodes => {
                    variant.n_nodes = value.parse().map_err(|_| bad(value))?;
                    self.protocols.clone()
                }
                Axis::Protocol => vec![parse_protocol(value)?],
            };
            for protocol in protocols {
                for rep in 0..self.replications {
                    let mut scenario = Scenario { protocol, ..variant.clone() };
                    scenario.seed = self.base.seed.wrapping_add(u64::from(rep));
                    scenario.validate()?;
                    cells.push(Cell { axis_value: value.clone(), replication: rep, scenario });
                }
            }
        }
        Ok(cells)
    }
}

/// A cell whose run failed; the sweep carries on without it.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub axis_value: String,
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepOutput {
    /// Sorted by (axis value position, protocol, seed).
    pub rows: Vec<MetricsRow>,
    pub failures: Vec<CellFailure>,
}

/// Number of parallel runs: the request (or the machine's parallelism),
/// capped by `MANET_LAB_JOBS` when set.
pub fn effective_jobs(requested: Option<usize>) -> usize {
    let wanted = requested.unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var("MANET_LAB_JOBS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(wanted, |c| wanted.min(c)).max(1)
}

/// Runs every cell, `jobs` at a time. Each run owns its own event loop, so the
/// rows do not depend on `jobs` or on scheduling order.
pub fn run_sweep(plan: &SweepPlan, jobs: usize) -> Result<SweepOutput, ScenarioError> {
    let cells = plan.cells()?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<MetricsRow, CellFailure>)>> = Mutex::new(Vec::with_capacity(cells.len()));
    thread::scope(|s| {
        for _ in 0..jobs.max(1).min(cells.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let out = run_one(&cell.scenario).map_err(|e| CellFailure {
                    axis_value: cell.axis_value.clone(),
                    protocol: cell.scenario.protocol,
                    seed: cell.scenario.seed,
                    error: e.to_string(),
                });
                results.lock().expect("no worker panicked").push((i, out));
            });
        }
    });
    let mut results = results.into_inner().expect("no worker panicked");
    results.sort_by_key(|(i, _)| *i);
    let position = |v: &str| plan.values.iter().position(|x| x == v).unwrap_or(usize::MAX);
    let mut out = SweepOutput::default();
    let mut keyed = Vec::new();
    for (i, r) in results {
        match r {
            Ok(row) => keyed.push(((position(&cells[i].axis_value), row.protocol.clone(), row.seed), row)),
            Err(f) => out.failures.push(f),
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    out.rows = keyed.into_iter().map(|(_, r)| r).collect();
    Ok(out)
}
