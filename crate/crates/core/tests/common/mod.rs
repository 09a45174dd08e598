#![allow(dead_code)]

use std::collections::VecDeque;

use manet_core::metrics::{replay, LogRecord};
use manet_core::mobility::WaypointTrace;
use manet_core::rng::RngStream;
use manet_core::scenario::{AnySimulation, Scenario};
use manet_core::traffic::CbrStream;
use manet_core::{MetricsRow, NodeId, Position, ProtocolKind, SimTime};

pub const RANGE: f64 = 250.0;

pub fn static_traces(positions: &[Position], end: SimTime) -> Vec<WaypointTrace> {
    positions.iter().enumerate().map(|(i, &p)| WaypointTrace::stationary(NodeId(i as u32), p, end)).collect()
}

pub fn stream(src: u32, dst: u32, count: u64, interval: SimTime, start: SimTime) -> CbrStream {
    CbrStream {
        src: NodeId(src),
        dst: NodeId(dst),
        packet_size: 512,
        interval,
        start_at: start,
        stop_at: start + interval * (count - 1),
    }
}

/// Scenario for a hand-built static topology.
pub fn static_scenario(protocol: ProtocolKind, n: usize, duration: f64) -> Scenario {
    Scenario { protocol, n_nodes: n as u32, duration, ..Scenario::default() }
}

/// Hop distances from `src` in the unit-disk graph; `u32::MAX` if unreachable.
pub fn bfs(positions: &[Position], src: usize) -> Vec<u32> {
    let n = positions.len();
    let mut d = vec![u32::MAX; n];
    d[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for v in 0..n {
            let (dx, dy) = (positions[u].x - positions[v].x, positions[u].y - positions[v].y);
            if v != u && d[v] == u32::MAX && (dx * dx + dy * dy).sqrt() <= RANGE {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

pub fn connected(positions: &[Position]) -> bool {
    bfs(positions, 0).iter().all(|&d| d != u32::MAX)
}

/// Uniform placements in a `side` x `side` square, redrawn until connected.
pub fn random_connected(rng: &mut RngStream, n: usize, side: f64) -> Vec<Position> {
    loop {
        let ps: Vec<Position> =
            (0..n).map(|_| Position::new(rng.uniform(0.0, side), rng.uniform(0.0, side))).collect();
        if connected(&ps) {
            return ps;
        }
    }
}

/// Runs a built simulation to its horizon and checks the accounting against
/// a replay of the event log.
pub fn run_checked(sc: &Scenario, mut sim: AnySimulation) -> (MetricsRow, Vec<LogRecord>, AnySimulation) {
    sim.run();
    let row = sim.finish(sc.meta()).expect("run finished without internal errors");
    row.check_identities().unwrap();
    let log = sim.world().log().expect("log recorded").to_vec();
    let replayed = replay(&log).unwrap();
    assert_eq!(&replayed, sim.world().metrics(), "metrics differ from log replay");
    (row, log, sim)
}

/// Source `S`, relay `a`, local maximum `x`, a detour `u1..u4` around an empty
/// zone, and destination `D` (index 7). Every neighbor of `x` is farther
/// from `D` than `x` is.
pub const VOID_S: usize = 0;
pub const VOID_X: usize = 2;
pub const VOID_D: usize = 7;

pub fn void_topology() -> Vec<Position> {
    vec![
        Position::new(0.0, 500.0),   // S
        Position::new(200.0, 500.0), // a
        Position::new(400.0, 500.0), // x
        Position::new(400.0, 700.0), // u1
        Position::new(600.0, 750.0), // u2
        Position::new(800.0, 700.0), // u3
        Position::new(900.0, 550.0), // u4
        Position::new(1000.0, 500.0), // D
    ]
}
