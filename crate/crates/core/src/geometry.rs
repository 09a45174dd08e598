//! Planar geometry on node positions (meters).

use core::f64::consts::TAU;

use crate::error::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn dist(self, other: Position) -> f64 {
        dist(self, other)
    }

    pub fn dist_sq(self, other: Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Position, f: f64) -> Position {
        Position::new(self.x + (other.x - self.x) * f, self.y + (other.y - self.y) * f)
    }
}

/// Euclidean distance.
pub fn dist(a: Position, b: Position) -> f64 {
    libm::sqrt(a.dist_sq(b))
}

fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

fn sweep(v1: (f64, f64), v2: (f64, f64)) -> f64 {
    let a = libm::atan2(cross(v1.0, v1.1, v2.0, v2.1), v1.0 * v2.0 + v1.1 * v2.1);
    let a = if a < 0.0 { a + TAU } else { a };
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Counterclockwise angle, in `[0, 2π)`, swept from the direction of travel
/// along `reference` to `candidate`.
///
/// Both edges are given as `(pivot, other)`. The reference edge is the one a
/// packet arrived on, so its direction of travel is `other -> pivot`; a
/// candidate that continues straight ahead has angle 0.
pub fn ccw_angle(reference: (Position, Position), candidate: (Position, Position)) -> Result<f64, Error> {
    let (pivot, prev) = reference;
    let (cpivot, next) = candidate;
    debug_assert!(pivot == cpivot, "edges must share the pivot");
    let v1 = (pivot.x - prev.x, pivot.y - prev.y);
    let v2 = (next.x - cpivot.x, next.y - cpivot.y);
    if v1 == (0.0, 0.0) || v2 == (0.0, 0.0) {
        return Err(Error::DegenerateEdge);
    }
    Ok(sweep(v1, v2))
}

/// Counterclockwise angle, in `[0, 2π)`, from the ray `pivot -> toward` to the
/// ray `pivot -> candidate`.
pub fn ccw_from_ray(pivot: Position, toward: Position, candidate: Position) -> Result<f64, Error> {
    let v1 = (toward.x - pivot.x, toward.y - pivot.y);
    let v2 = (candidate.x - pivot.x, candidate.y - pivot.y);
    if v1 == (0.0, 0.0) || v2 == (0.0, 0.0) {
        return Err(Error::DegenerateEdge);
    }
    Ok(sweep(v1, v2))
}

/// Intersection point of the closed segments `a1-a2` and `b1-b2`. Parallel
/// (including collinear) segments report `None`.
pub fn segment_intersection(a1: Position, a2: Position, b1: Position, b2: Position) -> Option<Position> {
    let r = (a2.x - a1.x, a2.y - a1.y);
    let s = (b2.x - b1.x, b2.y - b1.y);
    let denom = cross(r.0, r.1, s.0, s.1);
    if denom == 0.0 {
        return None;
    }
    let qp = (b1.x - a1.x, b1.y - a1.y);
    let t = cross(qp.0, qp.1, s.0, s.1) / denom;
    let u = cross(qp.0, qp.1, r.0, r.1) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(Position::new(a1.x + t * r.0, a1.y + t * r.1))
    } else {
        None
    }
}

/// True when the open segments `a1-a2` and `b1-b2` cross at a single interior
/// point. Segments that merely share an endpoint do not cross.
pub fn segments_cross(a1: Position, a2: Position, b1: Position, b2: Position) -> bool {
    let o = |p: Position, q: Position, r: Position| cross(q.x - p.x, q.y - p.y, r.x - p.x, r.y - p.y);
    let d1 = o(b1, b2, a1);
    let d2 = o(b1, b2, a2);
    let d3 = o(a1, a2, b1);
    let d4 = o(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    const O: Position = Position::new(0.0, 0.0);

    #[test]
    fn three_four_five() {
        assert_eq!(dist(O, Position::new(3.0, 4.0)), 5.0);
        assert_eq!(dist(Position::new(1.5, -2.0), Position::new(1.5, -2.0)), 0.0);
    }

    #[test]
    fn arriving_from_west_turning_north() {
        let west = Position::new(-10.0, 0.0);
        let north = Position::new(0.0, 10.0);
        let a = ccw_angle((O, west), (O, north)).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn straight_ahead_is_zero() {
        let west = Position::new(-10.0, 0.0);
        let east = Position::new(25.0, 0.0);
        assert_eq!(ccw_angle((O, west), (O, east)).unwrap(), 0.0);
        // Going back where it came from is half a turn.
        assert!((ccw_angle((O, west), (O, west)).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn degenerate_edges_rejected() {
        assert_eq!(ccw_angle((O, O), (O, Position::new(1.0, 0.0))), Err(Error::DegenerateEdge));
        assert_eq!(ccw_angle((O, Position::new(1.0, 0.0)), (O, O)), Err(Error::DegenerateEdge));
        assert_eq!(ccw_from_ray(O, O, Position::new(1.0, 0.0)), Err(Error::DegenerateEdge));
    }

    #[test]
    fn crossing_segments() {
        let p = segment_intersection(
            Position::new(0.0, 0.0),
            Position::new(2.0, 2.0),
            Position::new(0.0, 2.0),
            Position::new(2.0, 0.0),
        )
        .unwrap();
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!(segments_cross(
            Position::new(0.0, 0.0),
            Position::new(2.0, 2.0),
            Position::new(0.0, 2.0),
            Position::new(2.0, 0.0)
        ));
        // Shared endpoint is not a crossing.
        assert!(!segments_cross(O, Position::new(1.0, 0.0), O, Position::new(0.0, 1.0)));
        assert!(segment_intersection(O, Position::new(1.0, 0.0), Position::new(0.0, 1.0), Position::new(1.0, 1.0))
            .is_none());
    }

    fn polar(p: Position) -> f64 {
        let a = libm::atan2(p.y, p.x);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    /// Independent route: difference of absolute polar angles, normalised.
    fn oracle(pivot: Position, prev: Position, next: Position) -> f64 {
        let heading = polar(Position::new(pivot.x - prev.x, pivot.y - prev.y));
        let cand = polar(Position::new(next.x - pivot.x, next.y - pivot.y));
        let mut d = cand - heading;
        while d < 0.0 {
            d += TAU;
        }
        while d >= TAU {
            d -= TAU;
        }
        d
    }

    fn coord() -> impl Strategy<Value = f64> {
        -500.0..500.0f64
    }

    fn circ_diff(a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        d.min(TAU - d)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn dist_is_symmetric(ax in coord(), ay in coord(), bx in coord(), by in coord()) {
            let a = Position::new(ax, ay);
            let b = Position::new(bx, by);
            prop_assert_eq!(dist(a, b), dist(b, a));
            prop_assert!(dist(a, b) >= 0.0);
        }

        #[test]
        fn ccw_angle_matches_polar_oracle(
            px in coord(), py in coord(), ax in coord(), ay in coord(), bx in coord(), by in coord()
        ) {
            let pivot = Position::new(px, py);
            let prev = Position::new(ax, ay);
            let next = Position::new(bx, by);
            prop_assume!(dist(pivot, prev) > 1e-6 && dist(pivot, next) > 1e-6);
            let got = ccw_angle((pivot, prev), (pivot, next)).unwrap();
            prop_assert!((0.0..TAU).contains(&got));
            prop_assert!(circ_diff(got, oracle(pivot, prev, next)) < 1e-9);
        }

        #[test]
        fn ccw_order_matches_polar_order(
            px in coord(), py in coord(),
            pts in proptest::collection::vec((coord(), coord()), 2..12),
        ) {
            let pivot = Position::new(px, py);
            let prev = Position::new(pts[0].0, pts[0].1);
            prop_assume!(dist(pivot, prev) > 1e-6);
            let cands: alloc::vec::Vec<Position> = pts[1..]
                .iter()
                .map(|&(x, y)| Position::new(x, y))
                .filter(|c| dist(pivot, *c) > 1e-6)
                .collect();
            let mut by_impl: alloc::vec::Vec<(f64, usize)> = cands
                .iter()
                .enumerate()
                .map(|(i, c)| (ccw_angle((pivot, prev), (pivot, *c)).unwrap(), i))
                .collect();
            let mut by_oracle: alloc::vec::Vec<(f64, usize)> = cands
                .iter()
                .enumerate()
                .map(|(i, c)| (oracle(pivot, prev, *c), i))
                .collect();
            by_impl.sort_by(|a, b| a.partial_cmp(b).unwrap());
            by_oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (x, y) in by_impl.iter().zip(&by_oracle) {
                // Near-equal angles may swap; the angle values must still agree.
                prop_assert!(x.1 == y.1 || circ_diff(x.0, y.0) < 1e-9);
            }
        }
    }
}
