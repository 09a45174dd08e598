//! Packet formats for all three protocols.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Position;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketKind {
    Data,
    Rreq,
    Rrep,
    Rerr,
    /// GPSR position beacon.
    Beacon,
    /// AODV hello (neighbor liveness only, no position).
    Hello,
}

impl PacketKind {
    pub const ALL: [PacketKind; 6] =
        [PacketKind::Data, PacketKind::Rreq, PacketKind::Rrep, PacketKind::Rerr, PacketKind::Beacon, PacketKind::Hello];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PacketKind::Data => "DATA",
            PacketKind::Rreq => "RREQ",
            PacketKind::Rrep => "RREP",
            PacketKind::Rerr => "RERR",
            PacketKind::Beacon => "BEACON",
            PacketKind::Hello => "HELLO",
        }
    }
}

/// Route request. The flood origin and the sought destination are the
/// packet's `origin` and `final_dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rreq {
    pub rreq_id: u32,
    pub origin_seq: u32,
    /// Last destination sequence number known to the origin; 0 = unknown.
    pub dst_seq: u32,
    pub hop_count: u32,
}

/// Route reply travelling back to the discovery origin (`final_dst`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rrep {
    /// Destination the reply advertises a route to.
    pub dst: NodeId,
    pub dst_seq: u32,
    /// Hops from the node currently holding the reply to `dst`.
    pub hop_count: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rerr {
    pub unreachable: Vec<(NodeId, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerimeterState {
    /// Where the packet entered perimeter mode.
    pub loc_entry: Position,
    /// Point on the entry-to-destination line where the current face was entered.
    pub face_entry: Position,
    /// First edge walked on the current face.
    pub first_edge: (crate::NodeId, crate::NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeoMode {
    Greedy,
    Perimeter(PerimeterState),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoHeader {
    /// Destination position recorded by the source. Never updated in flight.
    pub dst_pos: Position,
    pub mode: GeoMode,
    /// Position of the previous hop, written by each sender.
    pub last_hop_pos: Option<Position>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrpMode {
    GeoGreedy,
    AodvRoute,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrpHeader {
    pub mode: CrpMode,
    pub dst_pos: Position,
}

/// Routing state a DATA packet carries; exactly one variant per protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DataRouting {
    Table,
    Geo(GeoHeader),
    Crp(CrpHeader),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Data(DataRouting),
    Rreq(Rreq),
    Rrep(Rrep),
    Rerr(Rerr),
    Beacon { pos: Position },
    Hello,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub uid: u64,
    pub origin: NodeId,
    pub final_dst: NodeId,
    pub created_at: SimTime,
    /// Remaining hop budget.
    pub ttl: u32,
    /// Transmissions this packet has taken so far.
    pub hops: u32,
    pub size_bytes: u32,
    pub payload: Payload,
}

impl Packet {
    pub fn kind(&self) -> PacketKind {
        match self.payload {
            Payload::Data(_) => PacketKind::Data,
            Payload::Rreq(_) => PacketKind::Rreq,
            Payload::Rrep(_) => PacketKind::Rrep,
            Payload::Rerr(_) => PacketKind::Rerr,
            Payload::Beacon { .. } => PacketKind::Beacon,
            Payload::Hello => PacketKind::Hello,
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self.payload, Payload::Data(_))
    }

    pub fn routing(&self) -> Option<&DataRouting> {
        match &self.payload {
            Payload::Data(r) => Some(r),
            _ => None,
        }
    }

    pub fn routing_mut(&mut self) -> Option<&mut DataRouting> {
        match &mut self.payload {
            Payload::Data(r) => Some(r),
            _ => None,
        }
    }

    /// Consumes one hop of budget before forwarding. Returns `false` (and
    /// leaves the packet unchanged) when the budget is exhausted.
    pub fn take_hop(&mut self) -> bool {
        if self.ttl <= 1 {
            return false;
        }
        self.ttl -= 1;
        true
    }
}

/// Per-kind counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindCounts(pub [u64; 6]);

impl KindCounts {
    pub fn add(&mut self, kind: PacketKind) {
        self.0[kind.index()] += 1;
    }

    pub fn get(&self, kind: PacketKind) -> u64 {
        self.0[kind.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(ttl: u32) -> Packet {
        Packet {
            uid: 1,
            origin: NodeId(0),
            final_dst: NodeId(1),
            created_at: SimTime::ZERO,
            ttl,
            hops: 0,
            size_bytes: 512,
            payload: Payload::Data(DataRouting::Table),
        }
    }

    #[test]
    fn ttl_one_cannot_be_forwarded() {
        let mut p = data(1);
        assert!(!p.take_hop());
        assert_eq!(p.ttl, 1);
        let mut p = data(3);
        assert!(p.take_hop());
        assert!(p.take_hop());
        assert!(!p.take_hop());
        assert_eq!(p.ttl, 1);
    }

    #[test]
    fn kinds_index_densely() {
        for (i, k) in PacketKind::ALL.iter().enumerate() {
            assert_eq!(k.index(), i);
        }
        assert_eq!(data(1).kind(), PacketKind::Data);
    }
}
