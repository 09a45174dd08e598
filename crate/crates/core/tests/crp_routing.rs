mod common;

use common::{run_checked, static_scenario, static_traces, stream, void_topology, VOID_D, VOID_S, VOID_X};
use manet_core::crp::CrpNode;
use manet_core::metrics::{HopMode, LogRecord, StuckReason};
use manet_core::mobility::WaypointTrace;
use manet_core::scenario::{run_one, AnySimulation};
use manet_core::sim::Simulation;
use manet_core::{DropCause, NodeId, PacketKind, Position, ProtocolKind, Scenario, SimTime};

fn crp(sim: &AnySimulation) -> &Simulation<CrpNode> {
    match sim {
        AnySimulation::Crp(s) => s,
        _ => panic!("not a CRP simulation"),
    }
}

fn rreq_anchors(log: &[LogRecord]) -> Vec<NodeId> {
    let mut v: Vec<NodeId> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::Transmit { kind: PacketKind::Rreq, node, origin, .. } if node == origin => Some(*origin),
            _ => None,
        })
        .collect();
    v.dedup();
    v
}

#[test]
fn void_is_escaped_by_a_discovery_from_the_stuck_node() {
    let ps = void_topology();
    let sc = static_scenario(ProtocolKind::Crp, ps.len(), 10.0);
    let streams = vec![stream(VOID_S as u32, VOID_D as u32, 10, SimTime::from_millis(250), SimTime::from_secs(2))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, log, sim) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 10);
    assert_eq!(row.tx_by_kind.get(PacketKind::Rerr), 0);
    assert_eq!(row.tx_by_kind.get(PacketKind::Hello), 0);
    assert!(row.tx_by_kind.get(PacketKind::Beacon) > 0);
    // One flood, anchored at x; later packets use the cached escape route.
    assert_eq!(rreq_anchors(&log), [NodeId(VOID_X as u32)]);
    assert_eq!(crp(&sim).nodes()[VOID_X].aodv.diag.floods_started, 1);

    let first = log.iter().find_map(|r| if let LogRecord::Originate { uid, .. } = r { Some(*uid) } else { None }).unwrap();
    let path: Vec<(u32, HopMode)> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::Transmit { uid, node, mode: Some(m), ok: true, .. } if *uid == first => Some((node.0, *m)),
            _ => None,
        })
        .collect();
    assert_eq!(
        path,
        [
            (0, HopMode::CrpGreedy),
            (1, HopMode::CrpGreedy),
            (2, HopMode::CrpRoute),
            (3, HopMode::CrpRoute),
            (4, HopMode::CrpRoute),
            (5, HopMode::CrpRoute),
            (6, HopMode::CrpRoute),
        ]
    );
    let stuck_at_x = log
        .iter()
        .filter(|r| matches!(r, LogRecord::Stuck { node, reason: StuckReason::LocalMaximum, .. } if node.index() == VOID_X))
        .count();
    assert_eq!(stuck_at_x, 10);
}

#[test]
fn escape_cache_off_floods_again_once_the_route_is_gone() {
    let ps = void_topology();
    let mut sc = static_scenario(ProtocolKind::Crp, ps.len(), 30.0);
    sc.crp.escape_cache = false;
    let streams = vec![
        stream(VOID_S as u32, VOID_D as u32, 1, SimTime::from_secs(1), SimTime::from_secs(2)),
        stream(VOID_S as u32, VOID_D as u32, 1, SimTime::from_secs(1), SimTime::from_secs(3)),
    ];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, _, sim) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 2);
    assert_eq!(crp(&sim).nodes()[VOID_X].aodv.diag.floods_started, 2);
}

#[test]
fn void_free_network_routes_purely_greedily() {
    let ps: Vec<Position> = (0..6).map(|i| Position::new(150.0 * i as f64, 0.0)).collect();
    let sc = static_scenario(ProtocolKind::Crp, ps.len(), 6.0);
    let streams = vec![stream(0, 5, 8, SimTime::from_millis(250), SimTime::from_secs(2))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, log, _) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 8);
    assert_eq!(row.tx_by_kind.get(PacketKind::Rreq), 0);
    assert!(log.iter().all(|r| !matches!(r, LogRecord::Transmit { mode: Some(HopMode::CrpRoute), .. })));
}

// Void topology plus a spare relay v next to u3. v hears the flood at the
// same instant as u3 but later in dispatch order, so the first route runs
// through u3. At 5 s u3 vanishes.
#[test]
fn route_break_loses_one_packet_and_reanchors() {
    let end = SimTime::from_secs(12);
    let mut ps = void_topology();
    ps.push(Position::new(760.0, 600.0));
    let mut traces = static_traces(&ps, end);
    traces[5] = WaypointTrace::from_waypoints(
        NodeId(5),
        ps[5],
        SimTime::from_secs(5),
        &[(Position::new(800.0, 2000.0), 5000.0, end)],
        end,
    );
    let sc = static_scenario(ProtocolKind::Crp, ps.len(), 12.0);
    let streams = vec![stream(VOID_S as u32, VOID_D as u32, 37, SimTime::from_millis(250), SimTime::from_secs(2))];
    let sim = sc.build(traces, streams, true);
    let (row, log, sim) = run_checked(&sc, sim);
    assert_eq!(row.tx_by_kind.get(PacketKind::Rerr), 0);
    assert_eq!(row.drops.get(DropCause::LinkFailure), 1, "no repair: the packet at the break is lost");
    assert_eq!(row.delivered + 1, row.sent);
    let (break_t, at) = log
        .iter()
        .find_map(|r| match r {
            LogRecord::Transmit { t, node, ok: false, kind: PacketKind::Data, .. } => Some((*t, *node)),
            _ => None,
        })
        .unwrap();
    assert_eq!(at, NodeId(4), "u2 is the node whose next hop vanished");
    // The next packet finds no route at u2 and discovers a new one from there.
    let next_flood = log.iter().find_map(|r| match r {
        LogRecord::Transmit { t, kind: PacketKind::Rreq, node, origin, .. } if node == origin && *t > break_t => {
            Some(*node)
        }
        _ => None,
    });
    assert_eq!(next_flood, Some(NodeId(4)));
    let relayed_by_v = log.iter().any(|r| {
        matches!(r, LogRecord::Transmit { t, node: NodeId(8), kind: PacketKind::Data, ok: true, .. } if *t > break_t)
    });
    assert!(relayed_by_v);
    // The failed neighbor is gone from both tables at u2.
    let u2 = &crp(&sim).nodes()[4];
    let heard_again = u2.neighbors.get(NodeId(5)).is_some_and(|e| e.last_heard > break_t);
    assert!(!heard_again);
    assert!(u2.aodv.routes.iter().all(|e| !(e.active && e.next_hop == NodeId(5))));
}

#[test]
fn unreachable_destination_times_out_at_the_stuck_node() {
    let mut ps = void_topology();
    ps[VOID_D] = Position::new(3000.0, 500.0);
    let sc = static_scenario(ProtocolKind::Crp, ps.len(), 10.0);
    let streams = vec![stream(VOID_S as u32, VOID_D as u32, 3, SimTime::from_millis(10), SimTime::from_secs(2))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, _, _) = run_checked(&sc, sim);
    assert_eq!(row.drops.get(DropCause::DiscoveryTimeout), 3);
    assert_eq!(row.delivered, 0);
}

// Beacon timing comes from per-node substreams shared by both protocols.
#[test]
fn beacon_overhead_matches_gpsr() {
    let base = Scenario { duration: 60.0, n_streams: 5, ..Scenario::default() };
    let g = run_one(&Scenario { protocol: ProtocolKind::Gpsr, ..base.clone() }).unwrap();
    let c = run_one(&Scenario { protocol: ProtocolKind::Crp, ..base }).unwrap();
    assert!(g.tx_by_kind.get(PacketKind::Beacon) > 0);
    assert_eq!(g.tx_by_kind.get(PacketKind::Beacon), c.tx_by_kind.get(PacketKind::Beacon));
    assert_eq!(c.tx_by_kind.get(PacketKind::Hello), 0);
    assert_eq!(c.tx_by_kind.get(PacketKind::Rerr), 0);
}
