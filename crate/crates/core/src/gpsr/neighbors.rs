use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geometry::Position;
use crate::packet::NodeId;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    /// Position advertised in the neighbor's last beacon.
    pub pos: Position,
    pub last_heard: SimTime,
}

/// One-hop neighbor positions learned from beacons.
#[derive(Clone, Debug)]
pub struct NeighborTable {
    timeout: SimTime,
    entries: BTreeMap<NodeId, NeighborEntry>,
}

impl NeighborTable {
    pub fn new(timeout: SimTime) -> Self {
        NeighborTable { timeout, entries: BTreeMap::new() }
    }

    pub fn update(&mut self, neighbor: NodeId, pos: Position, now: SimTime) {
        self.entries.insert(neighbor, NeighborEntry { neighbor, pos, last_heard: now });
    }

    pub fn remove(&mut self, neighbor: NodeId) -> bool {
        self.entries.remove(&neighbor).is_some()
    }

    /// Drops entries not refreshed within the timeout.
    pub fn evict_stale(&mut self, now: SimTime) {
        let timeout = self.timeout;
        self.entries.retain(|_, e| now.saturating_sub(e.last_heard) <= timeout);
    }

    /// Evicts stale entries, then returns the rest in id order.
    pub fn fresh(&mut self, now: SimTime) -> Vec<NeighborEntry> {
        self.evict_stale(now);
        self.entries.values().copied().collect()
    }

    pub fn get(&self, neighbor: NodeId) -> Option<&NeighborEntry> {
        self.entries.get(&neighbor)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
