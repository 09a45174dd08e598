//! Combined routing: greedy geographic forwarding while it makes progress,
//! and a simplified AODV discovery launched from the node where it stops.
//!
//! Compared with plain AODV the discovery part has no route repair (a packet
//! whose next hop vanished is dropped, no RERR is sent) and no hello
//! messages: link liveness comes from MAC feedback only. Position beacons are
//! kept because greedy forwarding needs neighbor positions.
//!
//! A DATA packet moves through two modes, never backwards:
//! `GeoGreedy` until some node is a local maximum, then `AodvRoute` along the
//! table route that node discovered (or already had cached).

use crate::aodv::{AodvConfig, AodvCore, DiscoveryTimeout, RrepResult};
use crate::gpsr::{greedy_next_hop, Beaconing, GpsrConfig, GreedyChoice, NeighborTable};
use crate::metrics::{DropCause, HopMode, StuckReason};
use crate::packet::{CrpHeader, CrpMode, DataRouting, NodeId, Packet, Payload};
use crate::sim::{Ctx, Protocol};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrpConfig {
    /// Reuse routes found by earlier discoveries at a local maximum.
    pub escape_cache: bool,
    /// A table-routed packet that finds no route at an intermediate node
    /// starts a new discovery there instead of being dropped.
    pub reanchor_on_route_loss: bool,
}

impl Default for CrpConfig {
    fn default() -> Self {
        CrpConfig { escape_cache: true, reanchor_on_route_loss: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrpTimer {
    Beacon,
    Discovery(NodeId),
}

impl From<DiscoveryTimeout> for CrpTimer {
    fn from(t: DiscoveryTimeout) -> Self {
        CrpTimer::Discovery(t.dst)
    }
}

#[derive(Debug)]
pub struct CrpNode {
    id: NodeId,
    cfg: CrpConfig,
    pub neighbors: NeighborTable,
    beaconing: Beaconing,
    /// Route table doubles as the escape-route cache.
    pub aodv: AodvCore,
}

fn header(packet: &Packet) -> Option<CrpHeader> {
    match packet.routing() {
        Some(DataRouting::Crp(h)) => Some(*h),
        _ => None,
    }
}

fn set_mode(packet: &mut Packet, mode: CrpMode) {
    if let Some(DataRouting::Crp(h)) = packet.routing_mut() {
        h.mode = mode;
    }
}

impl CrpNode {
    pub fn new(id: NodeId, cfg: CrpConfig, gpsr: GpsrConfig, mut aodv: AodvConfig, seed: u64) -> Self {
        aodv.hello = false;
        CrpNode {
            id,
            cfg,
            neighbors: NeighborTable::new(gpsr.neighbor_timeout),
            beaconing: Beaconing::new(id, gpsr, seed),
            aodv: AodvCore::new(id, aodv),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    /// Forwards a DATA packet not addressed to this node.
    fn forward(&mut self, ctx: &mut Ctx<'_, CrpTimer>, packet: Packet) {
        let Some(h) = header(&packet) else {
            ctx.drop_packet(packet, DropCause::LinkFailure);
            return;
        };
        match h.mode {
            CrpMode::GeoGreedy => self.forward_greedy(ctx, packet, h),
            CrpMode::AodvRoute => self.forward_on_route(ctx, packet),
        }
    }

    fn forward_greedy(&mut self, ctx: &mut Ctx<'_, CrpTimer>, packet: Packet, h: CrpHeader) {
        for attempt in 0..2 {
            let now = ctx.now();
            let me = ctx.position();
            let nbrs = self.neighbors.fresh(now);
            match greedy_next_hop(me, &nbrs, h.dst_pos) {
                GreedyChoice::Next(n) => {
                    if ctx.unicast(n, &packet, Some(HopMode::CrpGreedy)).is_delivered() {
                        return;
                    }
                    self.forget_neighbor(n, now);
                    if attempt == 1 {
                        ctx.drop_packet(packet, DropCause::LinkFailure);
                        return;
                    }
                }
                GreedyChoice::LocalMaximum => {
                    ctx.note_stuck(packet.uid, StuckReason::LocalMaximum);
                    self.on_local_maximum(ctx, packet);
                    return;
                }
            }
        }
    }

    fn forward_on_route(&mut self, ctx: &mut Ctx<'_, CrpTimer>, packet: Packet) {
        let now = ctx.now();
        let dst = packet.final_dst;
        match self.aodv.next_hop(dst, now) {
            Some(next) => {
                self.aodv.touch(dst, now);
                if !ctx.unicast(next, &packet, Some(HopMode::CrpRoute)).is_delivered() {
                    // No repair, no RERR: lose this packet, later ones re-anchor.
                    self.forget_neighbor(next, now);
                    ctx.drop_packet(packet, DropCause::LinkFailure);
                }
            }
            None if self.cfg.reanchor_on_route_loss => {
                ctx.note_stuck(packet.uid, StuckReason::RouteLost);
                self.aodv.enqueue(ctx, packet);
            }
            None => ctx.drop_packet(packet, DropCause::LinkFailure),
        }
    }

    /// Greedy forwarding is stuck here: use a cached route if allowed,
    /// otherwise buffer the packet and discover a route from this node.
    fn on_local_maximum(&mut self, ctx: &mut Ctx<'_, CrpTimer>, mut packet: Packet) {
        set_mode(&mut packet, CrpMode::AodvRoute);
        if self.cfg.escape_cache && self.aodv.next_hop(packet.final_dst, ctx.now()).is_some() {
            self.forward_on_route(ctx, packet);
        } else {
            self.aodv.enqueue(ctx, packet);
        }
    }

    /// A unicast to `n` failed: it is gone from both tables.
    fn forget_neighbor(&mut self, n: NodeId, now: SimTime) {
        self.neighbors.remove(n);
        self.aodv.routes.invalidate_via(n, now);
    }
}

impl Protocol for CrpNode {
    type Timer = CrpTimer;

    fn start(&mut self, ctx: &mut Ctx<'_, CrpTimer>) {
        let d = self.beaconing.first_delay();
        ctx.set_timer(d, CrpTimer::Beacon);
    }

    fn originate(&mut self, ctx: &mut Ctx<'_, CrpTimer>, mut packet: Packet) {
        if packet.final_dst == self.id {
            ctx.deliver(packet);
            return;
        }
        let dst_pos = ctx.location_of(packet.final_dst);
        packet.payload = Payload::Data(DataRouting::Crp(CrpHeader { mode: CrpMode::GeoGreedy, dst_pos }));
        self.forward(ctx, packet);
    }

    fn receive(&mut self, ctx: &mut Ctx<'_, CrpTimer>, mut packet: Packet, from: NodeId) {
        match packet.payload {
            Payload::Beacon { pos } => self.neighbors.update(from, pos, ctx.now()),
            Payload::Data(_) => {
                if packet.final_dst == self.id {
                    ctx.deliver(packet);
                } else if !packet.take_hop() {
                    ctx.drop_packet(packet, DropCause::Ttl);
                } else {
                    self.forward(ctx, packet);
                }
            }
            Payload::Rreq(_) => self.aodv.handle_rreq(ctx, packet, from),
            Payload::Rrep(_) => {
                if let RrepResult::RouteReady { packets, .. } = self.aodv.handle_rrep(ctx, packet, from) {
                    for mut p in packets {
                        set_mode(&mut p, CrpMode::AodvRoute);
                        self.forward_on_route(ctx, p);
                    }
                }
            }
            Payload::Rerr(_) | Payload::Hello => {}
        }
    }

    fn on_timer(&mut self, ctx: &mut Ctx<'_, CrpTimer>, timer: CrpTimer) {
        match timer {
            CrpTimer::Beacon => {
                self.beaconing.send(ctx);
                let d = self.beaconing.next_delay();
                ctx.set_timer(d, CrpTimer::Beacon);
            }
            CrpTimer::Discovery(dst) => {
                if let Some(dropped) = self.aodv.on_discovery_timeout(ctx, dst) {
                    for p in dropped {
                        ctx.drop_packet(p, DropCause::DiscoveryTimeout);
                    }
                }
            }
        }
    }
}
