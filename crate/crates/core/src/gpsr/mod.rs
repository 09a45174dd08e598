//! Greedy Perimeter Stateless Routing.
//!
//! Nodes learn one-hop neighbor positions from periodic beacons. A DATA packet
//! carries the destination position; each hop hands it to the neighbor
//! closest to that position. At a local maximum the packet walks the faces of
//! the locally computed Gabriel graph by the right-hand rule until it reaches
//! a node closer to the destination than where the walk began.

mod neighbors;
mod planar;

pub use neighbors::{NeighborEntry, NeighborTable};
pub use planar::{greedy_next_hop, perimeter_next_hop, perimeter_start, planarize_gg, GreedyChoice, PerimeterStep};

use crate::geometry::{dist, Position};
use crate::metrics::{DropCause, HopMode, StuckReason};
use crate::packet::{DataRouting, GeoHeader, GeoMode, NodeId, Packet, Payload};
use crate::rng::RngStream;
use crate::sim::{node_label, Ctx, Protocol};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpsrConfig {
    pub beacon_interval: SimTime,
    /// Each interval is perturbed uniformly within `+-beacon_jitter`.
    pub beacon_jitter: SimTime,
    pub neighbor_timeout: SimTime,
    pub beacon_size: u32,
    pub perimeter_enabled: bool,
}

impl Default for GpsrConfig {
    fn default() -> Self {
        GpsrConfig {
            beacon_interval: SimTime::from_secs(1),
            beacon_jitter: SimTime::from_millis(250),
            neighbor_timeout: SimTime::from_millis(4500),
            beacon_size: 32,
            perimeter_enabled: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpsrTimer {
    Beacon,
}

/// Beacon scheduling shared with the combined protocol. Each node draws from
/// its own substream, so beacon timing is identical across protocols that
/// beacon.
#[derive(Debug)]
pub struct Beaconing {
    cfg: GpsrConfig,
    rng: RngStream,
}

impl Beaconing {
    pub fn new(id: NodeId, cfg: GpsrConfig, seed: u64) -> Self {
        Beaconing { cfg, rng: RngStream::new(seed, &node_label("beacon", id)) }
    }

    pub fn first_delay(&mut self) -> SimTime {
        SimTime::from_micros(self.rng.below(self.cfg.beacon_interval.as_micros().max(1)))
    }

    pub fn next_delay(&mut self) -> SimTime {
        let j = self.cfg.beacon_jitter.as_micros();
        let base = self.cfg.beacon_interval.as_micros();
        let offset = if j == 0 { 0 } else { self.rng.below(2 * j + 1) };
        SimTime::from_micros((base + offset).saturating_sub(j).max(1))
    }

    /// Broadcasts this node's current position.
    pub fn send<T>(&self, ctx: &mut Ctx<'_, T>) {
        let pos = ctx.position();
        let packet = Packet {
            uid: ctx.new_uid(),
            origin: ctx.node(),
            final_dst: ctx.node(),
            created_at: ctx.now(),
            ttl: 1,
            hops: 0,
            size_bytes: self.cfg.beacon_size,
            payload: Payload::Beacon { pos },
        };
        ctx.broadcast(&packet);
    }
}

enum Decision {
    Send(NodeId, HopMode),
    Drop(DropCause),
}

#[derive(Debug)]
pub struct GpsrNode {
    id: NodeId,
    cfg: GpsrConfig,
    pub neighbors: NeighborTable,
    beaconing: Beaconing,
}

impl GpsrNode {
    pub fn new(id: NodeId, cfg: GpsrConfig, seed: u64) -> Self {
        GpsrNode { id, cfg, neighbors: NeighborTable::new(cfg.neighbor_timeout), beaconing: Beaconing::new(id, cfg, seed) }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    /// Routing state held by this node: neighbor entries only.
    pub fn state_size(&self) -> usize {
        self.neighbors.len()
    }

    fn decide(&mut self, ctx: &mut Ctx<'_, GpsrTimer>, geo: &mut GeoHeader, uid: u64, from: Option<NodeId>) -> Decision {
        let now = ctx.now();
        let me = ctx.position();
        let nbrs = self.neighbors.fresh(now);
        if let GeoMode::Perimeter(st) = geo.mode {
            if dist(me, geo.dst_pos) < dist(st.loc_entry, geo.dst_pos) {
                geo.mode = GeoMode::Greedy;
            }
        }
        match geo.mode {
            GeoMode::Greedy => match greedy_next_hop(me, &nbrs, geo.dst_pos) {
                GreedyChoice::Next(n) => Decision::Send(n, HopMode::Greedy),
                GreedyChoice::LocalMaximum => {
                    ctx.note_stuck(uid, StuckReason::LocalMaximum);
                    if !self.cfg.perimeter_enabled {
                        return Decision::Drop(DropCause::PerimeterExhausted);
                    }
                    let planar = planarize_gg(me, &nbrs);
                    match perimeter_start(self.id, me, geo.dst_pos, &planar) {
                        Some((st, n)) => {
                            geo.mode = GeoMode::Perimeter(st);
                            Decision::Send(n, HopMode::Perimeter)
                        }
                        None => Decision::Drop(DropCause::PerimeterExhausted),
                    }
                }
            },
            GeoMode::Perimeter(mut st) => {
                let planar = planarize_gg(me, &nbrs);
                let prev = match (from, geo.last_hop_pos) {
                    (Some(id), Some(p)) if p != me => (id, p),
                    // No usable arrival edge: restart the walk from here.
                    _ => match perimeter_start(self.id, me, geo.dst_pos, &planar) {
                        Some((fresh, n)) => {
                            geo.mode = GeoMode::Perimeter(fresh);
                            return Decision::Send(n, HopMode::Perimeter);
                        }
                        None => return Decision::Drop(DropCause::PerimeterExhausted),
                    },
                };
                match perimeter_next_hop(self.id, me, &mut st, geo.dst_pos, prev, &planar) {
                    PerimeterStep::Next(n) => {
                        geo.mode = GeoMode::Perimeter(st);
                        Decision::Send(n, HopMode::Perimeter)
                    }
                    PerimeterStep::Exhausted => Decision::Drop(DropCause::PerimeterExhausted),
                }
            }
        }
    }

    /// Forwards a DATA packet that is not addressed to this node. A failed
    /// unicast evicts the neighbor and the decision is retried once.
    fn forward(&mut self, ctx: &mut Ctx<'_, GpsrTimer>, mut packet: Packet, from: Option<NodeId>) {
        let Some(DataRouting::Geo(original)) = packet.routing().copied() else {
            ctx.drop_packet(packet, DropCause::LinkFailure);
            return;
        };
        for attempt in 0..2 {
            let mut geo = original;
            match self.decide(ctx, &mut geo, packet.uid, from) {
                Decision::Send(next, mode) => {
                    geo.last_hop_pos = Some(ctx.position());
                    packet.payload = Payload::Data(DataRouting::Geo(geo));
                    if ctx.unicast(next, &packet, Some(mode)).is_delivered() {
                        return;
                    }
                    self.neighbors.remove(next);
                    if attempt == 1 {
                        ctx.drop_packet(packet, DropCause::LinkFailure);
                        return;
                    }
                }
                Decision::Drop(cause) => {
                    ctx.drop_packet(packet, cause);
                    return;
                }
            }
        }
    }
}

impl Protocol for GpsrNode {
    type Timer = GpsrTimer;

    fn start(&mut self, ctx: &mut Ctx<'_, GpsrTimer>) {
        let d = self.beaconing.first_delay();
        ctx.set_timer(d, GpsrTimer::Beacon);
    }

    fn originate(&mut self, ctx: &mut Ctx<'_, GpsrTimer>, mut packet: Packet) {
        if packet.final_dst == self.id {
            ctx.deliver(packet);
            return;
        }
        let dst_pos = ctx.location_of(packet.final_dst);
        packet.payload = Payload::Data(DataRouting::Geo(GeoHeader { dst_pos, mode: GeoMode::Greedy, last_hop_pos: None }));
        self.forward(ctx, packet, None);
    }

    fn receive(&mut self, ctx: &mut Ctx<'_, GpsrTimer>, mut packet: Packet, from: NodeId) {
        match packet.payload {
            Payload::Beacon { pos } => self.neighbors.update(from, pos, ctx.now()),
            Payload::Data(_) => {
                if packet.final_dst == self.id {
                    ctx.deliver(packet);
                } else if !packet.take_hop() {
                    ctx.drop_packet(packet, DropCause::Ttl);
                } else {
                    self.forward(ctx, packet, Some(from));
                }
            }
            _ => {}
        }
    }

    fn on_timer(&mut self, ctx: &mut Ctx<'_, GpsrTimer>, timer: GpsrTimer) {
        match timer {
            GpsrTimer::Beacon => {
                self.beaconing.send(ctx);
                let d = self.beaconing.next_delay();
                ctx.set_timer(d, GpsrTimer::Beacon);
            }
        }
    }
}

/// Convenience for tests and tools: the planar (Gabriel) neighbor set of
/// `pos` given all node positions and a radio range.
pub fn local_gabriel_neighbors(pos: Position, me: NodeId, all: &[Position], range: f64) -> alloc::vec::Vec<NodeId> {
    let nbrs: alloc::vec::Vec<NeighborEntry> = all
        .iter()
        .enumerate()
        .filter(|&(i, p)| i != me.index() && dist(pos, *p) <= range)
        .map(|(i, p)| NeighborEntry { neighbor: NodeId(i as u32), pos: *p, last_heard: SimTime::ZERO })
        .collect();
    planarize_gg(pos, &nbrs).into_iter().map(|e| e.neighbor).collect()
}
