//! Event loop wiring traces, radio, traffic and per-node protocol instances.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::event::{EventHandle, Scheduler};
use crate::geometry::Position;
use crate::metrics::{DropCause, HopMode, LogRecord, Metrics, MetricsRow, RunMeta, StuckReason};
use crate::mobility::WaypointTrace;
use crate::packet::{DataRouting, NodeId, Packet, Payload};
use crate::radio::{self, RadioConfig, TxOutcome};
use crate::rng::RngStream;
use crate::time::SimTime;
use crate::traffic::CbrStream;

/// A routing protocol instance running on one node.
pub trait Protocol {
    type Timer: Clone + fmt::Debug;

    /// Called once at time zero, in node-id order.
    fn start(&mut self, ctx: &mut Ctx<'_, Self::Timer>);

    /// A DATA packet generated locally. The payload carries
    /// [`DataRouting::Table`]; protocols that route by position replace it.
    fn originate(&mut self, ctx: &mut Ctx<'_, Self::Timer>, packet: Packet);

    fn receive(&mut self, ctx: &mut Ctx<'_, Self::Timer>, packet: Packet, from: NodeId);

    fn on_timer(&mut self, ctx: &mut Ctx<'_, Self::Timer>, timer: Self::Timer);
}

#[derive(Clone, Debug)]
pub enum SimEvent<T> {
    PacketArrival { to: NodeId, from: NodeId, packet: Packet },
    TimerExpiry { node: NodeId, timer: T },
    TrafficEmit { stream: usize, k: u64 },
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub radio: RadioConfig,
    pub data_ttl: u32,
    pub horizon: SimTime,
    pub seed: u64,
    /// Keep a full [`LogRecord`] log (tests, replay checks).
    pub record_log: bool,
}

/// Everything except the protocol instances and the queue.
pub struct World {
    pub config: SimConfig,
    traces: Vec<WaypointTrace>,
    streams: Vec<CbrStream>,
    positions: Vec<Position>,
    positions_at: Option<SimTime>,
    jitter: RngStream,
    metrics: Metrics,
    log: Option<Vec<LogRecord>>,
    errors: Vec<Error>,
    next_uid: u64,
}

impl World {
    fn refresh_positions(&mut self, now: SimTime) {
        if self.positions_at == Some(now) {
            return;
        }
        for (slot, trace) in self.positions.iter_mut().zip(&self.traces) {
            *slot = trace.position_at(now).unwrap_or_else(|_| {
                trace.position_at(trace.end()).expect("trace end is in range")
            });
        }
        self.positions_at = Some(now);
    }

    pub fn positions(&mut self, now: SimTime) -> &[Position] {
        self.refresh_positions(now);
        &self.positions
    }

    pub fn traces(&self) -> &[WaypointTrace] {
        &self.traces
    }

    pub fn streams(&self) -> &[CbrStream] {
        &self.streams
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn log(&self) -> Option<&[LogRecord]> {
        self.log.as_deref()
    }

    pub fn errors(&self) -> &[Error] {
        &self.errors
    }

    fn push_log(&mut self, rec: impl FnOnce() -> LogRecord) {
        if let Some(log) = self.log.as_mut() {
            log.push(rec());
        }
    }

    fn fresh_uid(&mut self) -> u64 {
        let uid = self.next_uid;
        self.next_uid += 1;
        uid
    }

    fn jitter(&mut self) -> SimTime {
        let max = self.config.radio.jitter_max.as_micros();
        if max == 0 {
            SimTime::ZERO
        } else {
            SimTime::from_micros(self.jitter.below(max + 1))
        }
    }
}

/// The view a protocol instance gets of the world while handling one event.
pub struct Ctx<'a, T> {
    node: NodeId,
    queue: &'a mut Scheduler<SimEvent<T>>,
    world: &'a mut World,
}

impl<'a, T> Ctx<'a, T> {
    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.world.config.radio
    }

    /// This node's current position (from its own positioning device).
    pub fn position(&mut self) -> Position {
        let now = self.now();
        self.world.positions(now)[self.node.index()]
    }

    /// Location service: current position of any node. Only used to stamp a
    /// destination position into a packet at origination.
    pub fn location_of(&mut self, node: NodeId) -> Position {
        let now = self.now();
        self.world.positions(now)[node.index()]
    }

    pub fn new_uid(&mut self) -> u64 {
        self.world.fresh_uid()
    }

    /// Sends to every node in range; counts as one transmission.
    pub fn broadcast(&mut self, packet: &Packet) {
        let now = self.now();
        let kind = packet.kind();
        self.world.metrics.record_transmission(kind, true);
        let node = self.node;
        self.world.push_log(|| LogRecord::Transmit {
            t: now,
            node,
            to: None,
            kind,
            uid: packet.uid,
            origin: packet.origin,
            ok: true,
            mode: None,
        });
        let latency = self.world.config.radio.hop_latency(packet.size_bytes);
        let range = self.world.config.radio.range;
        let receivers = radio::neighbors(self.world.positions(now), node, range);
        for to in receivers {
            let at = now + latency + self.world.jitter();
            let mut copy = packet.clone();
            copy.hops += 1;
            self.queue.schedule_in(at - now, SimEvent::PacketArrival { to, from: node, packet: copy });
        }
    }

    /// Sends to one neighbor. Reachability is decided by positions at send
    /// time; an unreachable next hop is reported back immediately.
    pub fn unicast(&mut self, next_hop: NodeId, packet: &Packet, mode: Option<HopMode>) -> TxOutcome {
        debug_assert_ne!(next_hop, self.node);
        let now = self.now();
        let kind = packet.kind();
        self.world.metrics.record_transmission(kind, false);
        let node = self.node;
        let radio = self.world.config.radio;
        let positions = self.world.positions(now);
        let ok = next_hop.index() < positions.len()
            && next_hop != node
            && radio.in_range(positions[node.index()], positions[next_hop.index()]);
        self.world.push_log(|| LogRecord::Transmit {
            t: now,
            node,
            to: Some(next_hop),
            kind,
            uid: packet.uid,
            origin: packet.origin,
            ok,
            mode,
        });
        if !ok {
            return TxOutcome::LinkFailure;
        }
        let at = now + self.world.config.radio.hop_latency(packet.size_bytes) + self.world.jitter();
        let mut copy = packet.clone();
        copy.hops += 1;
        self.queue.schedule_in(at - now, SimEvent::PacketArrival { to: next_hop, from: node, packet: copy });
        TxOutcome::Delivered { receive_time: at }
    }

    pub fn set_timer(&mut self, delay: SimTime, timer: T) -> EventHandle {
        let node = self.node;
        self.queue.schedule_in(delay, SimEvent::TimerExpiry { node, timer })
    }

    pub fn cancel_timer(&mut self, handle: EventHandle) -> bool {
        self.queue.cancel(handle)
    }

    /// Hands a DATA packet to the application at this node.
    pub fn deliver(&mut self, packet: Packet) {
        debug_assert_eq!(packet.final_dst, self.node);
        let now = self.now();
        if !packet.is_data() {
            return;
        }
        if let Err(e) = self.world.metrics.record_delivery(packet.uid, packet.created_at, now) {
            self.world.errors.push(e);
        }
        let node = self.node;
        self.world.push_log(|| LogRecord::Deliver {
            t: now,
            uid: packet.uid,
            node,
            created_at: packet.created_at,
            hops: packet.hops,
        });
    }

    /// Discards a packet. Only DATA drops are accounted.
    pub fn drop_packet(&mut self, packet: Packet, cause: DropCause) {
        if !packet.is_data() {
            return;
        }
        if let Err(e) = self.world.metrics.record_drop(packet.uid, cause) {
            self.world.errors.push(e);
        }
        let now = self.now();
        let node = self.node;
        self.world.push_log(|| LogRecord::Drop { t: now, uid: packet.uid, node, cause });
    }

    pub fn note_stuck(&mut self, uid: u64, reason: StuckReason) {
        let now = self.now();
        let node = self.node;
        self.world.push_log(|| LogRecord::Stuck { t: now, uid, node, reason });
    }
}

pub struct Simulation<P: Protocol> {
    queue: Scheduler<SimEvent<P::Timer>>,
    world: World,
    nodes: Vec<P>,
    started: bool,
}

impl<P: Protocol> Simulation<P> {
    pub fn new(config: SimConfig, traces: Vec<WaypointTrace>, streams: Vec<CbrStream>, nodes: Vec<P>) -> Self {
        assert_eq!(traces.len(), nodes.len(), "one trace per node");
        let n = traces.len();
        let jitter = RngStream::new(config.seed, "jitter");
        let log = config.record_log.then(Vec::new);
        Simulation {
            queue: Scheduler::new(),
            world: World {
                config,
                traces,
                streams,
                positions: alloc::vec![Position::default(); n],
                positions_at: None,
                jitter,
                metrics: Metrics::new(),
                log,
                errors: Vec::new(),
                next_uid: 0,
            },
            nodes,
            started: false,
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    fn start(&mut self) {
        self.started = true;
        let Simulation { queue, world, nodes, .. } = self;
        for (i, node) in nodes.iter_mut().enumerate() {
            let mut ctx = Ctx { node: NodeId(i as u32), queue, world };
            node.start(&mut ctx);
        }
        for (i, s) in self.world.streams.iter().enumerate() {
            if let Some(t) = s.emission(0) {
                self.queue.schedule(t, SimEvent::TrafficEmit { stream: i, k: 0 }).expect("emissions are in the future");
            }
        }
    }

    /// Runs to `until` (clamped to the horizon). Returns the number of
    /// events dispatched by this call.
    pub fn run_until(&mut self, until: SimTime) -> usize {
        let horizon = self.world.config.horizon;
        if horizon == SimTime::ZERO {
            return 0;
        }
        if !self.started {
            self.start();
        }
        let until = if until > horizon { horizon } else { until };
        let Simulation { queue, world, nodes, .. } = self;
        queue.run_until(until, |queue, event| dispatch(queue, world, nodes, event))
    }

    pub fn run(&mut self) -> usize {
        self.run_until(self.world.config.horizon)
    }

    /// First internal error, or the metrics row for the run so far.
    pub fn finish(&self, meta: RunMeta) -> Result<MetricsRow, Error> {
        if let Some(e) = self.world.errors.first() {
            return Err(e.clone());
        }
        Ok(self.world.metrics.finalize(meta))
    }

    /// Run a closure against one node with a live context (tests use this to
    /// inject packets).
    pub fn with_node<R>(&mut self, node: NodeId, f: impl FnOnce(&mut P, &mut Ctx<'_, P::Timer>) -> R) -> R {
        let Simulation { queue, world, nodes, .. } = self;
        let mut ctx = Ctx { node, queue, world };
        f(&mut nodes[node.index()], &mut ctx)
    }
}

fn dispatch<P: Protocol>(
    queue: &mut Scheduler<SimEvent<P::Timer>>,
    world: &mut World,
    nodes: &mut [P],
    event: SimEvent<P::Timer>,
) {
    match event {
        SimEvent::PacketArrival { to, from, packet } => {
            let mut ctx = Ctx { node: to, queue, world };
            nodes[to.index()].receive(&mut ctx, packet, from);
        }
        SimEvent::TimerExpiry { node, timer } => {
            let mut ctx = Ctx { node, queue, world };
            nodes[node.index()].on_timer(&mut ctx, timer);
        }
        SimEvent::TrafficEmit { stream, k } => {
            let s = world.streams[stream];
            let now = queue.now();
            let uid = world.fresh_uid();
            world.metrics.record_origination(uid);
            world.push_log(|| LogRecord::Originate { t: now, uid, src: s.src, dst: s.dst });
            let packet = Packet {
                uid,
                origin: s.src,
                final_dst: s.dst,
                created_at: now,
                ttl: world.config.data_ttl,
                hops: 0,
                size_bytes: s.packet_size,
                payload: Payload::Data(DataRouting::Table),
            };
            if let Some(t) = s.emission(k + 1) {
                queue.schedule(t, SimEvent::TrafficEmit { stream, k: k + 1 }).expect("emissions are increasing");
            }
            let mut ctx = Ctx { node: s.src, queue, world };
            nodes[s.src.index()].originate(&mut ctx, packet);
        }
    }
}

/// Label for a per-node random substream, e.g. `beacon/7`.
pub fn node_label(prefix: &str, node: NodeId) -> alloc::string::String {
    format!("{prefix}/{}", node.0)
}
