//! Greedy choice, Gabriel-graph planarization and right-hand-rule walking.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::neighbors::NeighborEntry;
use crate::geometry::{ccw_from_ray, dist, segment_intersection, Position};
use crate::packet::{NodeId, PerimeterState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyChoice {
    Next(NodeId),
    /// No neighbor is strictly closer to the destination than this node.
    LocalMaximum,
}

/// Neighbor closest to `dst_pos` among those strictly closer than `self_pos`;
/// ties go to the lower node id.
pub fn greedy_next_hop(self_pos: Position, neighbors: &[NeighborEntry], dst_pos: Position) -> GreedyChoice {
    let own = dist(self_pos, dst_pos);
    let mut best: Option<(f64, NodeId)> = None;
    for n in neighbors {
        let d = dist(n.pos, dst_pos);
        if d >= own {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && n.neighbor < bid),
        };
        if better {
            best = Some((d, n.neighbor));
        }
    }
    best.map_or(GreedyChoice::LocalMaximum, |(_, id)| GreedyChoice::Next(id))
}

/// Gabriel graph restricted to one node's neighborhood: the edge to `v` is
/// kept unless some other neighbor lies strictly inside the circle whose
/// diameter is the edge.
pub fn planarize_gg(self_pos: Position, neighbors: &[NeighborEntry]) -> Vec<NeighborEntry> {
    neighbors
        .iter()
        .filter(|v| {
            let uv = self_pos.dist_sq(v.pos);
            !neighbors
                .iter()
                .any(|w| w.neighbor != v.neighbor && self_pos.dist_sq(w.pos) + v.pos.dist_sq(w.pos) < uv)
        })
        .copied()
        .collect()
}

/// First planar neighbor counterclockwise about `me` from the ray
/// `me -> toward`. The neighbor named `skip` (the edge the sweep starts
/// from) is taken only when nothing else exists.
fn next_ccw(me: Position, toward: Position, skip: Option<NodeId>, planar: &[NeighborEntry]) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for c in planar {
        let angle = if Some(c.neighbor) == skip { TAU } else { ccw_from_ray(me, toward, c.pos).unwrap_or(TAU) };
        let better = match best {
            None => true,
            Some((ba, bid)) => angle < ba || (angle == ba && c.neighbor < bid),
        };
        if better {
            best = Some((angle, c.neighbor));
        }
    }
    best.map(|(_, id)| id)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerimeterStep {
    Next(NodeId),
    /// The walk is about to repeat the first edge of its face, or there is
    /// no planar neighbor at all.
    Exhausted,
}

/// Starts a perimeter walk at a local maximum: the first planar edge
/// counterclockwise from the line towards the destination. Returns the new
/// perimeter state and the first hop.
pub fn perimeter_start(
    me_id: NodeId,
    me: Position,
    dst_pos: Position,
    planar: &[NeighborEntry],
) -> Option<(PerimeterState, NodeId)> {
    let first = next_ccw(me, dst_pos, None, planar)?;
    Some((PerimeterState { loc_entry: me, face_entry: me, first_edge: (me_id, first) }, first))
}

/// One perimeter-mode forwarding decision by the right-hand rule.
///
/// `prev` is the node the packet arrived from and its position. When the
/// chosen edge crosses the segment from the perimeter entry point to the
/// destination closer to the destination than the current face was entered,
/// the walk switches to the adjacent face.
pub fn perimeter_next_hop(
    me_id: NodeId,
    me: Position,
    state: &mut PerimeterState,
    dst_pos: Position,
    prev: (NodeId, Position),
    planar: &[NeighborEntry],
) -> PerimeterStep {
    let pos_of = |id: NodeId| planar.iter().find(|n| n.neighbor == id).map(|n| n.pos);
    let Some(mut next) = next_ccw(me, prev.1, Some(prev.0), planar) else {
        return PerimeterStep::Exhausted;
    };
    let mut changed_face = false;
    for _ in 0..=planar.len() {
        let next_pos = pos_of(next).expect("chosen from planar set");
        match segment_intersection(me, next_pos, state.loc_entry, dst_pos) {
            Some(cross) if dist(cross, dst_pos) < dist(state.face_entry, dst_pos) => {
                state.face_entry = cross;
                next = next_ccw(me, next_pos, Some(next), planar).expect("planar set is non-empty");
                state.first_edge = (me_id, next);
                changed_face = true;
            }
            _ => break,
        }
    }
    if !changed_face && state.first_edge == (me_id, next) {
        return PerimeterStep::Exhausted;
    }
    PerimeterStep::Next(next)
}
