mod common;

use common::{bfs, run_checked, static_scenario, static_traces, stream};
use manet_core::metrics::{HopMode, LogRecord};
use manet_core::mobility::WaypointTrace;
use manet_core::scenario::AnySimulation;
use manet_core::sim::Simulation;
use manet_core::aodv::AodvNode;
use manet_core::traffic::CbrStream;
use manet_core::{DropCause, NodeId, PacketKind, Position, ProtocolKind, SimTime};

fn chain(n: usize, spacing: f64) -> Vec<Position> {
    (0..n).map(|i| Position::new(i as f64 * spacing, 0.0)).collect()
}

fn aodv(sim: &AnySimulation) -> &Simulation<AodvNode> {
    match sim {
        AnySimulation::Aodv(s) => s,
        _ => panic!("not an AODV simulation"),
    }
}

fn transmits(log: &[LogRecord], kind: PacketKind) -> Vec<&LogRecord> {
    log.iter().filter(|r| matches!(r, LogRecord::Transmit { kind: k, .. } if *k == kind)).collect()
}

#[test]
fn chain_discovery_installs_shortest_forward_routes() {
    let ps = chain(4, 200.0);
    let sc = static_scenario(ProtocolKind::Aodv, 4, 5.0);
    let streams = vec![stream(0, 3, 1, SimTime::from_secs(1), SimTime::from_secs(1))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, log, sim) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 1);
    let s = aodv(&sim);
    let now = s.now();
    let to_d = bfs(&ps, 3);
    for (a, next) in [(0, 1), (1, 2), (2, 3)] {
        let e = s.nodes()[a].routes().lookup(NodeId(3), now).expect("forward route");
        assert_eq!(e.next_hop, NodeId(next));
        assert_eq!(e.hop_count, to_d[a]);
    }
    // Flood: A, B and C broadcast once each; D answers instead.
    assert_eq!(transmits(&log, PacketKind::Rreq).len(), 3);
    assert_eq!(transmits(&log, PacketKind::Rrep).len(), 3);
    assert_eq!(transmits(&log, PacketKind::Data).len(), 3);
    let delivered_hops: Vec<u32> =
        log.iter().filter_map(|r| if let LogRecord::Deliver { hops, .. } = r { Some(*hops) } else { None }).collect();
    assert_eq!(delivered_hops, [3]);
}

#[test]
fn cached_route_sends_without_new_flood_and_timer_is_cancelled() {
    let ps = chain(4, 200.0);
    let sc = static_scenario(ProtocolKind::Aodv, 4, 10.0);
    let streams = vec![stream(0, 3, 5, SimTime::from_secs(1), SimTime::from_secs(1))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, log, sim) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 5);
    assert_eq!(transmits(&log, PacketKind::Rreq).len(), 3);
    let a = &aodv(&sim).nodes()[0];
    assert_eq!(a.core.diag.floods_started, 1, "no retry flood after the reply");
    assert!(!a.core.is_pending(NodeId(3)));
}

#[test]
fn buffered_packets_leave_in_fifo_order_after_the_reply() {
    let ps = chain(4, 200.0);
    let sc = static_scenario(ProtocolKind::Aodv, 4, 5.0);
    let streams = vec![stream(0, 3, 5, SimTime::from_millis(1), SimTime::from_secs(1))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, log, _) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 5);
    let originated: Vec<u64> =
        log.iter().filter_map(|r| if let LogRecord::Originate { uid, .. } = r { Some(*uid) } else { None }).collect();
    let rrep_at_origin = log
        .iter()
        .find_map(|r| match r {
            LogRecord::Transmit { t, to: Some(NodeId(0)), kind: PacketKind::Rrep, .. } => Some(*t),
            _ => None,
        })
        .unwrap();
    let first_hops: Vec<(SimTime, u64)> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::Transmit { t, node: NodeId(0), kind: PacketKind::Data, uid, .. } => Some((*t, *uid)),
            _ => None,
        })
        .collect();
    assert_eq!(first_hops.iter().map(|h| h.1).collect::<Vec<_>>(), originated);
    assert!(first_hops.iter().all(|h| h.0 > rrep_at_origin), "all five were buffered");
}

#[test]
fn self_addressed_packet_is_delivered_without_transmission() {
    let ps = chain(2, 100.0);
    let sc = static_scenario(ProtocolKind::Aodv, 2, 3.0);
    let s = CbrStream { dst: NodeId(0), ..stream(0, 1, 1, SimTime::from_secs(1), SimTime::from_secs(1)) };
    let mut sim = sc.build(static_traces(&ps, sc.horizon()), vec![s], true);
    sim.run();
    // Generated traffic never pairs a node with itself, so this bypasses the
    // "every delivery took a transmission" identity on purpose.
    let row = sim.finish(sc.meta()).unwrap();
    assert_eq!((row.sent, row.delivered, row.transmissions_total), (1, 1, 0));
    let log = sim.world().log().unwrap();
    assert!(log.iter().any(|r| matches!(r, LogRecord::Deliver { hops: 0, .. })));
}

#[test]
fn partitioned_destination_times_out_after_retries() {
    let ps = vec![Position::new(0.0, 0.0), Position::new(200.0, 0.0), Position::new(400.0, 0.0), Position::new(2000.0, 0.0)];
    let sc = static_scenario(ProtocolKind::Aodv, 4, 5.0);
    let streams = vec![stream(0, 3, 3, SimTime::from_millis(10), SimTime::from_secs(1))];
    let sim = sc.build(static_traces(&ps, sc.horizon()), streams, true);
    let (row, log, sim) = run_checked(&sc, sim);
    assert_eq!(row.delivered, 0);
    assert_eq!(row.drops.get(DropCause::DiscoveryTimeout), 3);
    let a = &aodv(&sim).nodes()[0];
    assert_eq!(a.core.diag.floods_started, 1 + sc.aodv.max_retries as u64);
    // Every retry carries a fresh id, so B and C relay each of the three floods.
    for relay in [1, 2] {
        let n = transmits(&log, PacketKind::Rreq)
            .iter()
            .filter(|r| matches!(r, LogRecord::Transmit { node, .. } if *node == NodeId(relay)))
            .count();
        assert_eq!(n, 3);
    }
    let timeout = sc.aodv_config().discovery_timeout;
    let dropped_at: Vec<SimTime> =
        log.iter().filter_map(|r| if let LogRecord::Drop { t, .. } = r { Some(*t) } else { None }).collect();
    assert_eq!(dropped_at, vec![SimTime::from_secs(1) + timeout * 3; 3]);
}

// A -- B -- C -- D with C leaving at 6 s; E drifts in beside the gap so
// a second route exists.
#[test]
fn link_break_sends_rerr_and_source_rediscovers() {
    let end = SimTime::from_secs(16);
    let ps = chain(4, 200.0);
    let mut traces = static_traces(&ps, end);
    traces[2] = WaypointTrace::from_waypoints(
        NodeId(2),
        ps[2],
        SimTime::from_secs(6),
        &[(Position::new(400.0, 900.0), 100.0, end)],
        end,
    );
    traces.push(WaypointTrace::from_waypoints(
        NodeId(4),
        Position::new(400.0, -300.0),
        SimTime::from_secs(2),
        &[(Position::new(400.0, -120.0), 90.0, end)],
        end,
    ));
    let sc = static_scenario(ProtocolKind::Aodv, 5, 16.0);
    let streams = vec![stream(0, 3, 29, SimTime::from_millis(500), SimTime::from_secs(1))];
    let sim = sc.build(traces, streams, true);
    let (row, log, sim) = run_checked(&sc, sim);

    let broke_at = log
        .iter()
        .find_map(|r| match r {
            LogRecord::Transmit { t, node: NodeId(1), to: Some(NodeId(2)), ok: false, .. } => Some(*t),
            _ => None,
        })
        .expect("B notices the break");
    let rerr_from_b = log.iter().any(|r| {
        matches!(r, LogRecord::Transmit { node: NodeId(1), kind: PacketKind::Rerr, t, .. } if *t == broke_at)
    });
    assert!(rerr_from_b);
    assert_eq!(aodv(&sim).nodes()[0].core.diag.floods_started, 2);
    let via_e_after_break = log.iter().any(|r| {
        matches!(r, LogRecord::Transmit { t, to: Some(NodeId(4)), kind: PacketKind::Data, mode: Some(HopMode::Table), ok: true, .. } if *t > broke_at)
    });
    assert!(via_e_after_break, "traffic now flows through E");
    assert_eq!(row.drops.get(DropCause::LinkFailure), 1, "only the packet at B is lost");
    assert_eq!(row.delivered, 28);
}

#[test]
fn link_failure_without_routes_through_it_sends_no_rerr() {
    let ps = chain(3, 200.0);
    let sc = static_scenario(ProtocolKind::Aodv, 3, 2.0);
    let sim = sc.build(static_traces(&ps, sc.horizon()), Vec::new(), true);
    let AnySimulation::Aodv(mut s) = sim else { unreachable!() };
    s.with_node(NodeId(1), |node, ctx| node.on_link_failure(ctx, NodeId(2), None));
    s.run();
    assert_eq!(s.nodes()[1].rerr_sent, 0);
    assert_eq!(s.world().metrics().transmissions_total, 0);
}
