use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::packet::NodeId;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RouteEntry {
    pub dst: NodeId,
    pub next_hop: NodeId,
    pub hop_count: u32,
    pub dst_seq: u32,
    pub expires_at: SimTime,
    pub active: bool,
}

impl RouteEntry {
    pub fn usable(&self, now: SimTime) -> bool {
        self.active && now < self.expires_at
    }
}

/// Per-destination next-hop table.
#[derive(Clone, Debug, Default)]
pub struct RouteTable {
    entries: BTreeMap<NodeId, RouteEntry>,
}

impl RouteTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, dst: NodeId) -> Option<&RouteEntry> {
        self.entries.get(&dst)
    }

    /// Entry for `dst` only if it may be used for forwarding now.
    pub fn lookup(&self, dst: NodeId, now: SimTime) -> Option<&RouteEntry> {
        self.entries.get(&dst).filter(|e| e.usable(now))
    }

    /// Last sequence number known for `dst`, valid or not; 0 if never seen.
    pub fn known_seq(&self, dst: NodeId) -> u32 {
        self.entries.get(&dst).map_or(0, |e| e.dst_seq)
    }

    /// Installs `candidate` if it is fresher than what the table holds: a
    /// strictly greater sequence number, or the same sequence number with
    /// fewer hops (or replacing an entry that is no longer usable). An
    /// identical route only has its lifetime extended. Returns whether the
    /// table now routes `dst` as `candidate` does.
    pub fn offer(&mut self, candidate: RouteEntry, now: SimTime) -> bool {
        match self.entries.get_mut(&candidate.dst) {
            None => {
                self.entries.insert(candidate.dst, candidate);
                true
            }
            Some(e) => {
                let replace = candidate.dst_seq > e.dst_seq
                    || (candidate.dst_seq == e.dst_seq
                        && (candidate.hop_count < e.hop_count || !e.usable(now)));
                if replace {
                    *e = candidate;
                    true
                } else if candidate.dst_seq == e.dst_seq
                    && candidate.hop_count == e.hop_count
                    && candidate.next_hop == e.next_hop
                {
                    if candidate.expires_at > e.expires_at {
                        e.expires_at = candidate.expires_at;
                    }
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Extends the lifetime of an active route that is being used.
    pub fn touch(&mut self, dst: NodeId, now: SimTime, lifetime: SimTime) {
        if let Some(e) = self.entries.get_mut(&dst) {
            if e.usable(now) && now + lifetime > e.expires_at {
                e.expires_at = now + lifetime;
            }
        }
    }

    /// Deactivates every route through `next_hop`, bumping each destination
    /// sequence number. Returns the `(dst, seq)` pairs of the routes that were
    /// still usable; expired ones are retired silently.
    pub fn invalidate_via(&mut self, next_hop: NodeId, now: SimTime) -> Vec<(NodeId, u32)> {
        let mut lost = Vec::new();
        for e in self.entries.values_mut() {
            if e.active && e.next_hop == next_hop {
                let was_usable = e.usable(now);
                e.active = false;
                e.dst_seq = e.dst_seq.wrapping_add(1);
                if was_usable {
                    lost.push((e.dst, e.dst_seq));
                }
            }
        }
        lost
    }

    /// Deactivates the route to `dst` if it goes through `via`.
    pub fn invalidate_if_via(&mut self, dst: NodeId, via: NodeId, seq: u32) -> Option<(NodeId, u32)> {
        let e = self.entries.get_mut(&dst)?;
        if !e.active || e.next_hop != via {
            return None;
        }
        e.active = false;
        e.dst_seq = e.dst_seq.max(seq);
        Some((dst, e.dst_seq))
    }

    pub fn iter(&self) -> impl Iterator<Item = &RouteEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Remembers which floods were already processed.
#[derive(Clone, Debug)]
pub struct RreqSeenCache {
    window: SimTime,
    order: VecDeque<(SimTime, NodeId, u32)>,
    seen: BTreeSet<(NodeId, u32)>,
}

impl RreqSeenCache {
    pub fn new(window: SimTime) -> Self {
        RreqSeenCache { window, order: VecDeque::new(), seen: BTreeSet::new() }
    }

    fn expire(&mut self, now: SimTime) {
        while let Some(&(t, origin, id)) = self.order.front() {
            if t + self.window > now {
                break;
            }
            self.order.pop_front();
            self.seen.remove(&(origin, id));
        }
    }

    /// Records the flood; `false` if it was already seen inside the window.
    pub fn insert(&mut self, origin: NodeId, rreq_id: u32, now: SimTime) -> bool {
        self.expire(now);
        if !self.seen.insert((origin, rreq_id)) {
            return false;
        }
        self.order.push_back((now, origin, rreq_id));
        true
    }

    pub fn contains(&self, origin: NodeId, rreq_id: u32) -> bool {
        self.seen.contains(&(origin, rreq_id))
    }
}
