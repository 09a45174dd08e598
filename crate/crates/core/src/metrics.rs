//! Delivery, delay and overhead accounting.
//!
//! Counters are updated live by the simulation and can also be rebuilt from
//! an event log with [`replay`]; both routes must agree exactly.

use alloc::collections::BTreeSet;
use alloc::string::String;

use crate::error::Error;
use crate::packet::{KindCounts, NodeId, PacketKind};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropCause {
    Ttl,
    LinkFailure,
    DiscoveryTimeout,
    Buffer,
    /// Perimeter walk exhausted, or a local maximum with perimeter mode off.
    PerimeterExhausted,
}

impl DropCause {
    pub const ALL: [DropCause; 5] =
        [DropCause::Ttl, DropCause::LinkFailure, DropCause::DiscoveryTimeout, DropCause::Buffer, DropCause::PerimeterExhausted];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DropCause::Ttl => "ttl",
            DropCause::LinkFailure => "link_failure",
            DropCause::DiscoveryTimeout => "discovery_timeout",
            DropCause::Buffer => "buffer",
            DropCause::PerimeterExhausted => "perimeter_exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DropCounts(pub [u64; 5]);

impl DropCounts {
    pub fn add(&mut self, cause: DropCause) {
        self.0[cause.index()] += 1;
    }

    pub fn get(&self, cause: DropCause) -> u64 {
        self.0[cause.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// How a DATA hop was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HopMode {
    Table,
    Greedy,
    Perimeter,
    CrpGreedy,
    CrpRoute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StuckReason {
    LocalMaximum,
    /// A table-routed packet found no usable route at an intermediate node.
    RouteLost,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LogRecord {
    Originate { t: SimTime, uid: u64, src: NodeId, dst: NodeId },
    /// One send primitive call. `to = None` is a broadcast.
    Transmit {
        t: SimTime,
        node: NodeId,
        to: Option<NodeId>,
        kind: PacketKind,
        uid: u64,
        /// Packet origin; for RREQ this is the flood's anchor.
        origin: NodeId,
        ok: bool,
        mode: Option<HopMode>,
    },
    Deliver { t: SimTime, uid: u64, node: NodeId, created_at: SimTime, hops: u32 },
    Drop { t: SimTime, uid: u64, node: NodeId, cause: DropCause },
    Stuck { t: SimTime, uid: u64, node: NodeId, reason: StuckReason },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub sent: u64,
    pub delivered: u64,
    pub delay_sum: SimTime,
    pub transmissions_total: u64,
    pub tx_by_kind: KindCounts,
    pub drops: DropCounts,
    outstanding: BTreeSet<u64>,
}

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_origination(&mut self, uid: u64) {
        self.sent += 1;
        self.outstanding.insert(uid);
    }

    /// One call per send primitive; a broadcast counts once however many
    /// nodes hear it, and a failed unicast still counts.
    pub fn record_transmission(&mut self, kind: PacketKind, _is_broadcast: bool) {
        self.transmissions_total += 1;
        self.tx_by_kind.add(kind);
    }

    pub fn record_delivery(&mut self, uid: u64, created_at: SimTime, now: SimTime) -> Result<(), Error> {
        if !self.outstanding.remove(&uid) {
            return Err(Error::DuplicateDelivery { uid });
        }
        self.delivered += 1;
        self.delay_sum += now - created_at;
        Ok(())
    }

    pub fn record_drop(&mut self, uid: u64, cause: DropCause) -> Result<(), Error> {
        if !self.outstanding.remove(&uid) {
            return Err(Error::UnknownPacket { uid });
        }
        self.drops.add(cause);
        Ok(())
    }

    /// DATA packets neither delivered nor dropped yet.
    pub fn in_flight(&self) -> u64 {
        self.outstanding.len() as u64
    }

    pub fn delivery_ratio(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.delivered as f64 / self.sent as f64
        }
    }

    /// Mean end-to-end delay in seconds; `None` when nothing was delivered.
    pub fn mean_delay(&self) -> Option<f64> {
        (self.delivered > 0).then(|| self.delay_sum.as_secs_f64() / self.delivered as f64)
    }

    pub fn finalize(&self, meta: RunMeta) -> MetricsRow {
        MetricsRow {
            protocol: meta.protocol,
            scenario_id: meta.scenario_id,
            seed: meta.seed,
            n_nodes: meta.n_nodes,
            pause_s: meta.pause_s,
            rate_pps: meta.rate_pps,
            sent: self.sent,
            delivered: self.delivered,
            delivery_ratio: self.delivery_ratio(),
            mean_delay_ms: self.mean_delay().map(|s| s * 1e3),
            transmissions_total: self.transmissions_total,
            drops: self.drops,
            in_flight: self.in_flight(),
            tx_by_kind: self.tx_by_kind,
        }
    }
}

/// Rebuilds the counters from an event log.
pub fn replay(log: &[LogRecord]) -> Result<Metrics, Error> {
    let mut m = Metrics::new();
    for rec in log {
        match rec {
            LogRecord::Originate { uid, .. } => m.record_origination(*uid),
            LogRecord::Transmit { kind, to, .. } => m.record_transmission(*kind, to.is_none()),
            LogRecord::Deliver { t, uid, created_at, .. } => m.record_delivery(*uid, *created_at, *t)?,
            LogRecord::Drop { uid, cause, .. } => m.record_drop(*uid, *cause)?,
            LogRecord::Stuck { .. } => {}
        }
    }
    Ok(m)
}

/// Identification columns for a result row.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMeta {
    pub protocol: String,
    pub scenario_id: String,
    pub seed: u64,
    pub n_nodes: u32,
    pub pause_s: f64,
    pub rate_pps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub protocol: String,
    pub scenario_id: String,
    pub seed: u64,
    pub n_nodes: u32,
    pub pause_s: f64,
    pub rate_pps: f64,
    pub sent: u64,
    pub delivered: u64,
    pub delivery_ratio: f64,
    pub mean_delay_ms: Option<f64>,
    pub transmissions_total: u64,
    pub drops: DropCounts,
    pub in_flight: u64,
    pub tx_by_kind: KindCounts,
}

impl MetricsRow {
    /// Checks the accounting identities every finished run must satisfy.
    pub fn check_identities(&self) -> Result<(), &'static str> {
        if self.delivered > self.sent {
            return Err("delivered exceeds sent");
        }
        if self.delivered + self.drops.total() + self.in_flight != self.sent {
            return Err("sent != delivered + drops + in_flight");
        }
        if !(0.0..=1.0).contains(&self.delivery_ratio) {
            return Err("delivery ratio outside [0, 1]");
        }
        let expected = if self.sent == 0 { 0.0 } else { self.delivered as f64 / self.sent as f64 };
        if self.delivery_ratio != expected {
            return Err("delivery ratio != delivered / sent");
        }
        if self.transmissions_total < self.delivered {
            return Err("fewer transmissions than deliveries");
        }
        if self.tx_by_kind.total() != self.transmissions_total {
            return Err("per-kind transmissions do not sum to the total");
        }
        if self.delivered == 0 && self.mean_delay_ms.is_some() {
            return Err("mean delay reported with no deliveries");
        }
        Ok(())
    }
}

/// Mean and sample standard deviation; `None` for an empty slice.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Some((mean, libm::sqrt(var)))
}
