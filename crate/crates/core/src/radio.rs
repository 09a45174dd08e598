//! Unit-disk radio model: who hears whom and how long a frame takes.

use alloc::vec::Vec;

use crate::geometry::{dist, Position};
use crate::packet::NodeId;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadioConfig {
    /// meters; links exist up to and including this distance
    pub range: f64,
    pub bandwidth_bps: u64,
    pub processing_delay: SimTime,
    /// Per-receiver delay drawn uniformly from `[0, jitter_max]`.
    pub jitter_max: SimTime,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            range: 250.0,
            bandwidth_bps: 2_000_000,
            processing_delay: SimTime::from_millis(1),
            jitter_max: SimTime::ZERO,
        }
    }
}

impl RadioConfig {
    /// Serialization time, rounded up to the next microsecond.
    pub fn tx_delay(&self, size_bytes: u32) -> SimTime {
        let bits = u128::from(size_bytes) * 8 * 1_000_000;
        let bw = u128::from(self.bandwidth_bps);
        SimTime::from_micros(bits.div_ceil(bw) as u64)
    }

    /// Delay from send to receipt without jitter. At least one microsecond so
    /// every receipt is strictly after its send.
    pub fn hop_latency(&self, size_bytes: u32) -> SimTime {
        let d = self.tx_delay(size_bytes) + self.processing_delay;
        if d == SimTime::ZERO {
            SimTime::from_micros(1)
        } else {
            d
        }
    }

    pub fn in_range(&self, a: Position, b: Position) -> bool {
        dist(a, b) <= self.range
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxOutcome {
    Delivered { receive_time: SimTime },
    LinkFailure,
}

impl TxOutcome {
    pub fn is_delivered(&self) -> bool {
        matches!(self, TxOutcome::Delivered { .. })
    }
}

/// Every other node within range of `node`, in id order.
pub fn neighbors(positions: &[Position], node: NodeId, range: f64) -> Vec<NodeId> {
    let me = positions[node.index()];
    positions
        .iter()
        .enumerate()
        .filter(|&(i, p)| i != node.index() && dist(me, *p) <= range)
        .map(|(i, _)| NodeId(i as u32))
        .collect()
}
