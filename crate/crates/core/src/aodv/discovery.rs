//! RREQ/RREP machinery shared by AODV and the combined protocol.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::table::{RouteEntry, RouteTable, RreqSeenCache};
use super::AodvConfig;
use crate::event::EventHandle;
use crate::metrics::DropCause;
use crate::packet::{NodeId, Packet, Payload, Rrep, Rreq};
use crate::sim::Ctx;

/// Fires when a discovery for `dst` has waited too long for a reply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscoveryTimeout {
    pub dst: NodeId,
}

#[derive(Debug)]
struct Pending {
    retries: u32,
    timer: EventHandle,
    buffer: VecDeque<Packet>,
}

#[derive(Debug, PartialEq)]
pub enum RrepResult {
    /// Passed on towards the discovery origin, or absorbed.
    Relayed,
    /// This node started the discovery; the buffered packets may now be sent.
    RouteReady { dst: NodeId, packets: Vec<Packet> },
    /// No usable reverse path.
    Dropped,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub floods_started: u64,
    pub rrep_no_reverse_path: u64,
    pub rrep_send_failures: u64,
}

#[derive(Debug)]
pub struct AodvCore {
    pub id: NodeId,
    pub cfg: AodvConfig,
    /// Own sequence number.
    pub seq: u32,
    rreq_id: u32,
    pub routes: RouteTable,
    seen: RreqSeenCache,
    pending: BTreeMap<NodeId, Pending>,
    pub diag: Diagnostics,
}

impl AodvCore {
    pub fn new(id: NodeId, cfg: AodvConfig) -> Self {
        AodvCore {
            id,
            seen: RreqSeenCache::new(cfg.seen_window),
            cfg,
            seq: 0,
            rreq_id: 0,
            routes: RouteTable::new(),
            pending: BTreeMap::new(),
            diag: Diagnostics::default(),
        }
    }

    pub fn next_hop(&self, dst: NodeId, now: crate::SimTime) -> Option<NodeId> {
        self.routes.lookup(dst, now).map(|e| e.next_hop)
    }

    pub fn touch(&mut self, dst: NodeId, now: crate::SimTime) {
        self.routes.touch(dst, now, self.cfg.route_lifetime);
    }

    pub fn is_pending(&self, dst: NodeId) -> bool {
        self.pending.contains_key(&dst)
    }

    /// Packets waiting for a route at this node.
    pub fn buffered(&self) -> usize {
        self.pending.values().map(|p| p.buffer.len()).sum()
    }

    /// Buffers a DATA packet until a route to its destination is known,
    /// starting a discovery if none is running. When the per-destination
    /// buffer is full the oldest packet is dropped.
    pub fn enqueue<T: From<DiscoveryTimeout>>(&mut self, ctx: &mut Ctx<'_, T>, packet: Packet) {
        let dst = packet.final_dst;
        if let Some(p) = self.pending.get_mut(&dst) {
            p.buffer.push_back(packet);
            if p.buffer.len() > self.cfg.buffer_cap {
                let oldest = p.buffer.pop_front().expect("buffer is non-empty");
                ctx.drop_packet(oldest, DropCause::Buffer);
            }
            return;
        }
        let timer = self.flood(ctx, dst);
        let mut buffer = VecDeque::new();
        buffer.push_back(packet);
        self.pending.insert(dst, Pending { retries: 0, timer, buffer });
    }

    fn flood<T: From<DiscoveryTimeout>>(&mut self, ctx: &mut Ctx<'_, T>, dst: NodeId) -> EventHandle {
        self.seq = self.seq.wrapping_add(1);
        self.rreq_id = self.rreq_id.wrapping_add(1);
        self.seen.insert(self.id, self.rreq_id, ctx.now());
        self.diag.floods_started += 1;
        let packet = Packet {
            uid: ctx.new_uid(),
            origin: self.id,
            final_dst: dst,
            created_at: ctx.now(),
            ttl: self.cfg.rreq_ttl,
            hops: 0,
            size_bytes: self.cfg.control_size,
            payload: Payload::Rreq(Rreq {
                rreq_id: self.rreq_id,
                origin_seq: self.seq,
                dst_seq: self.routes.known_seq(dst),
                hop_count: 0,
            }),
        };
        ctx.broadcast(&packet);
        ctx.set_timer(self.cfg.discovery_timeout, DiscoveryTimeout { dst }.into())
    }

    pub fn handle_rreq<T>(&mut self, ctx: &mut Ctx<'_, T>, mut packet: Packet, from: NodeId) {
        let Payload::Rreq(mut rreq) = packet.payload else {
            return;
        };
        let now = ctx.now();
        if packet.origin == self.id || !self.seen.insert(packet.origin, rreq.rreq_id, now) {
            return;
        }
        let hops = rreq.hop_count + 1;
        self.routes.offer(
            RouteEntry {
                dst: packet.origin,
                next_hop: from,
                hop_count: hops,
                dst_seq: rreq.origin_seq,
                expires_at: now + self.cfg.route_lifetime,
                active: true,
            },
            now,
        );
        let dst = packet.final_dst;
        let reply = if dst == self.id {
            self.seq = self.seq.max(rreq.dst_seq).wrapping_add(1);
            Some(Rrep { dst, dst_seq: self.seq, hop_count: 0 })
        } else {
            self.routes
                .lookup(dst, now)
                .filter(|e| e.dst_seq >= rreq.dst_seq)
                .map(|e| Rrep { dst, dst_seq: e.dst_seq, hop_count: e.hop_count })
        };
        match reply {
            Some(rrep) => {
                let reply = Packet {
                    uid: ctx.new_uid(),
                    origin: self.id,
                    final_dst: packet.origin,
                    created_at: now,
                    ttl: self.cfg.rreq_ttl,
                    hops: 0,
                    size_bytes: self.cfg.control_size,
                    payload: Payload::Rrep(rrep),
                };
                if !ctx.unicast(from, &reply, None).is_delivered() {
                    self.diag.rrep_send_failures += 1;
                }
            }
            None => {
                if packet.take_hop() {
                    rreq.hop_count = hops;
                    packet.payload = Payload::Rreq(rreq);
                    ctx.broadcast(&packet);
                }
            }
        }
    }

    pub fn handle_rrep<T>(&mut self, ctx: &mut Ctx<'_, T>, mut packet: Packet, from: NodeId) -> RrepResult {
        let Payload::Rrep(rrep) = packet.payload else {
            return RrepResult::Dropped;
        };
        let now = ctx.now();
        let hops = rrep.hop_count + 1;
        self.routes.offer(
            RouteEntry {
                dst: rrep.dst,
                next_hop: from,
                hop_count: hops,
                dst_seq: rrep.dst_seq,
                expires_at: now + self.cfg.route_lifetime,
                active: true,
            },
            now,
        );
        // Advertise whatever this node now actually uses, so upstream nodes
        // never install a route that disagrees with ours.
        let Some(route) = self.routes.lookup(rrep.dst, now).copied() else {
            return RrepResult::Dropped;
        };
        if packet.final_dst == self.id {
            return match self.pending.remove(&rrep.dst) {
                Some(p) => {
                    ctx.cancel_timer(p.timer);
                    RrepResult::RouteReady { dst: rrep.dst, packets: p.buffer.into_iter().collect() }
                }
                None => RrepResult::Relayed,
            };
        }
        let Some(back) = self.routes.lookup(packet.final_dst, now).map(|e| e.next_hop) else {
            self.diag.rrep_no_reverse_path += 1;
            return RrepResult::Dropped;
        };
        if !packet.take_hop() {
            return RrepResult::Dropped;
        }
        packet.payload = Payload::Rrep(Rrep { dst: rrep.dst, dst_seq: route.dst_seq, hop_count: route.hop_count });
        self.touch(packet.final_dst, now);
        if ctx.unicast(back, &packet, None).is_delivered() {
            RrepResult::Relayed
        } else {
            self.diag.rrep_send_failures += 1;
            RrepResult::Dropped
        }
    }

    /// Retries the discovery for `dst` while retries remain. Once they are
    /// exhausted the buffered packets are returned for the caller to drop.
    pub fn on_discovery_timeout<T: From<DiscoveryTimeout>>(
        &mut self,
        ctx: &mut Ctx<'_, T>,
        dst: NodeId,
    ) -> Option<Vec<Packet>> {
        let retries = self.pending.get(&dst)?.retries;
        if retries < self.cfg.max_retries {
            let timer = self.flood(ctx, dst);
            let p = self.pending.get_mut(&dst).expect("checked above");
            p.retries += 1;
            p.timer = timer;
            None
        } else {
            let p = self.pending.remove(&dst).expect("checked above");
            Some(p.buffer.into_iter().collect())
        }
    }
}
