//! Ad hoc On-demand Distance Vector routing.
//!
//! Routes are discovered only when a node has data for a destination it has
//! no route to: an RREQ flood installs reverse routes towards the origin, and
//! the destination (or a node with a fresh enough route) answers with an RREP
//! that retraces the reverse path and installs the forward route. Broken
//! links are learned from the MAC layer (or, optionally, from missing hello
//! messages) and announced with RERR broadcasts.

mod discovery;
mod table;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub use discovery::{AodvCore, Diagnostics, DiscoveryTimeout, RrepResult};
pub use table::{RouteEntry, RouteTable, RreqSeenCache};

use crate::metrics::{DropCause, HopMode};
use crate::packet::{NodeId, Packet, Payload, Rerr};
use crate::radio::RadioConfig;
use crate::rng::RngStream;
use crate::sim::{node_label, Ctx, Protocol};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AodvConfig {
    pub rreq_ttl: u32,
    pub route_lifetime: SimTime,
    pub max_retries: u32,
    /// Per-destination buffer at a discovering node.
    pub buffer_cap: usize,
    pub control_size: u32,
    pub discovery_timeout: SimTime,
    pub seen_window: SimTime,
    pub hello: bool,
    pub hello_interval: SimTime,
    pub allowed_hello_loss: u32,
    pub hello_size: u32,
}

impl AodvConfig {
    pub fn new(radio: &RadioConfig, rreq_ttl: u32) -> Self {
        let control_size = 64;
        AodvConfig {
            rreq_ttl,
            route_lifetime: SimTime::from_secs(10),
            max_retries: 2,
            buffer_cap: 64,
            control_size,
            discovery_timeout: discovery_timeout(radio, rreq_ttl, control_size),
            seen_window: SimTime::from_secs(10),
            hello: false,
            hello_interval: SimTime::from_secs(1),
            allowed_hello_loss: 2,
            hello_size: 32,
        }
    }
}

/// Twice the worst-case one-way flood latency, but at least 100 ms.
pub fn discovery_timeout(radio: &RadioConfig, ttl: u32, control_size: u32) -> SimTime {
    let per_hop = radio.tx_delay(control_size) + radio.processing_delay;
    let t = per_hop * (2 * u64::from(ttl));
    let floor = SimTime::from_millis(100);
    if t < floor {
        floor
    } else {
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AodvTimer {
    Discovery(NodeId),
    Hello,
}

impl From<DiscoveryTimeout> for AodvTimer {
    fn from(t: DiscoveryTimeout) -> Self {
        AodvTimer::Discovery(t.dst)
    }
}

#[derive(Debug)]
pub struct AodvNode {
    pub core: AodvCore,
    hello_heard: BTreeMap<NodeId, SimTime>,
    hello_rng: RngStream,
    pub rerr_sent: u64,
}

impl AodvNode {
    pub fn new(id: NodeId, cfg: AodvConfig, seed: u64) -> Self {
        AodvNode {
            core: AodvCore::new(id, cfg),
            hello_heard: BTreeMap::new(),
            hello_rng: RngStream::new(seed, &node_label("hello", id)),
            rerr_sent: 0,
        }
    }

    pub fn id(&self) -> NodeId {
        self.core.id
    }

    pub fn routes(&self) -> &RouteTable {
        &self.core.routes
    }

    fn send_data(&mut self, ctx: &mut Ctx<'_, AodvTimer>, packet: Packet) {
        let now = ctx.now();
        let dst = packet.final_dst;
        match self.core.next_hop(dst, now) {
            Some(next) => {
                self.core.touch(dst, now);
                if !ctx.unicast(next, &packet, Some(HopMode::Table)).is_delivered() {
                    self.on_link_failure(ctx, next, Some(packet));
                }
            }
            None if packet.origin == self.id() => self.core.enqueue(ctx, packet),
            None => {
                // Intermediate node without a route: tell upstream and drop.
                let seq = self.core.routes.known_seq(dst);
                ctx.drop_packet(packet, DropCause::LinkFailure);
                self.send_rerr(ctx, alloc::vec![(dst, seq)]);
            }
        }
    }

    /// MAC reported that `next_hop` is unreachable.
    pub fn on_link_failure(&mut self, ctx: &mut Ctx<'_, AodvTimer>, next_hop: NodeId, in_flight: Option<Packet>) {
        let lost = self.core.routes.invalidate_via(next_hop, ctx.now());
        self.hello_heard.remove(&next_hop);
        if !lost.is_empty() {
            self.send_rerr(ctx, lost);
        }
        if let Some(packet) = in_flight {
            if packet.origin == self.id() {
                self.core.enqueue(ctx, packet);
            } else {
                ctx.drop_packet(packet, DropCause::LinkFailure);
            }
        }
    }

    fn send_rerr(&mut self, ctx: &mut Ctx<'_, AodvTimer>, unreachable: Vec<(NodeId, u32)>) {
        let packet = Packet {
            uid: ctx.new_uid(),
            origin: self.id(),
            final_dst: self.id(),
            created_at: ctx.now(),
            ttl: 1,
            hops: 0,
            size_bytes: self.core.cfg.control_size,
            payload: Payload::Rerr(Rerr { unreachable }),
        };
        self.rerr_sent += 1;
        ctx.broadcast(&packet);
    }

    fn handle_rerr(&mut self, ctx: &mut Ctx<'_, AodvTimer>, rerr: Rerr, from: NodeId) {
        let lost: Vec<(NodeId, u32)> = rerr
            .unreachable
            .into_iter()
            .filter_map(|(dst, seq)| self.core.routes.invalidate_if_via(dst, from, seq))
            .collect();
        if !lost.is_empty() {
            self.send_rerr(ctx, lost);
        }
    }

    fn hello_tick(&mut self, ctx: &mut Ctx<'_, AodvTimer>) {
        let cfg = self.core.cfg;
        let now = ctx.now();
        let packet = Packet {
            uid: ctx.new_uid(),
            origin: self.id(),
            final_dst: self.id(),
            created_at: now,
            ttl: 1,
            hops: 0,
            size_bytes: cfg.hello_size,
            payload: Payload::Hello,
        };
        ctx.broadcast(&packet);
        let deadline = cfg.hello_interval * u64::from(cfg.allowed_hello_loss);
        let silent: Vec<NodeId> =
            self.hello_heard.iter().filter(|(_, &t)| now.saturating_sub(t) > deadline).map(|(n, _)| *n).collect();
        for n in silent {
            self.on_link_failure(ctx, n, None);
        }
        ctx.set_timer(cfg.hello_interval, AodvTimer::Hello);
    }
}

impl Protocol for AodvNode {
    type Timer = AodvTimer;

    fn start(&mut self, ctx: &mut Ctx<'_, AodvTimer>) {
        if self.core.cfg.hello {
            let first = self.hello_rng.below(self.core.cfg.hello_interval.as_micros().max(1));
            ctx.set_timer(SimTime::from_micros(first), AodvTimer::Hello);
        }
    }

    fn originate(&mut self, ctx: &mut Ctx<'_, AodvTimer>, packet: Packet) {
        if packet.final_dst == self.id() {
            ctx.deliver(packet);
            return;
        }
        self.send_data(ctx, packet);
    }

    fn receive(&mut self, ctx: &mut Ctx<'_, AodvTimer>, mut packet: Packet, from: NodeId) {
        match packet.payload {
            Payload::Data(_) => {
                if packet.final_dst == self.id() {
                    ctx.deliver(packet);
                } else if !packet.take_hop() {
                    ctx.drop_packet(packet, DropCause::Ttl);
                } else {
                    self.send_data(ctx, packet);
                }
            }
            Payload::Rreq(_) => self.core.handle_rreq(ctx, packet, from),
            Payload::Rrep(_) => {
                if let RrepResult::RouteReady { packets, .. } = self.core.handle_rrep(ctx, packet, from) {
                    for p in packets {
                        self.send_data(ctx, p);
                    }
                }
            }
            Payload::Rerr(rerr) => self.handle_rerr(ctx, rerr, from),
            Payload::Hello => {
                self.hello_heard.insert(from, ctx.now());
            }
            Payload::Beacon { .. } => {}
        }
    }

    fn on_timer(&mut self, ctx: &mut Ctx<'_, AodvTimer>, timer: AodvTimer) {
        match timer {
            AodvTimer::Discovery(dst) => {
                if let Some(dropped) = self.core.on_discovery_timeout(ctx, dst) {
                    for p in dropped {
                        ctx.drop_packet(p, DropCause::DiscoveryTimeout);
                    }
                }
            }
            AodvTimer::Hello => self.hello_tick(ctx),
        }
    }
}
