//! Random-waypoint mobility as precomputed piecewise-linear traces.

use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::{dist, Position};
use crate::packet::NodeId;
use crate::rng::RngStream;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub const fn new(width: f64, height: f64) -> Self {
        Area { width, height }
    }

    pub fn contains(&self, p: Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn random_point(&self, rng: &mut RngStream) -> Position {
        Position::new(rng.uniform(0.0, self.width), rng.uniform(0.0, self.height))
    }
}

/// One straight-line movement followed by a pause at its end point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leg {
    pub depart: SimTime,
    pub arrive: SimTime,
    pub from: Position,
    pub to: Position,
    /// m/s
    pub speed: f64,
    pub pause_after: SimTime,
}

impl Leg {
    fn new(depart: SimTime, from: Position, to: Position, speed: f64, pause_after: SimTime) -> Leg {
        let travel = SimTime::from_secs_f64(dist(from, to) / speed);
        Leg { depart, arrive: depart + travel, from, to, speed, pause_after }
    }

    pub fn next_depart(&self) -> SimTime {
        self.arrive + self.pause_after
    }

    fn position_at(&self, t: SimTime) -> Position {
        if t >= self.arrive {
            return self.to;
        }
        let span = (self.arrive - self.depart).as_micros();
        if span == 0 {
            return self.to;
        }
        let f = (t - self.depart).as_micros() as f64 / span as f64;
        self.from.lerp(self.to, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaypointTrace {
    pub node: NodeId,
    legs: Vec<Leg>,
    end: SimTime,
}

impl WaypointTrace {
    /// A node that never moves.
    pub fn stationary(node: NodeId, at: Position, end: SimTime) -> Self {
        WaypointTrace {
            node,
            legs: alloc::vec![Leg { depart: SimTime::ZERO, arrive: SimTime::ZERO, from: at, to: at, speed: 1.0, pause_after: end }],
            end,
        }
    }

    /// Builds a trace that starts at `start`, waits `initial_pause`, then
    /// visits each `(waypoint, speed, pause)` in turn.
    pub fn from_waypoints(
        node: NodeId,
        start: Position,
        initial_pause: SimTime,
        waypoints: &[(Position, f64, SimTime)],
        end: SimTime,
    ) -> Self {
        let mut legs = alloc::vec![Leg { depart: SimTime::ZERO, arrive: SimTime::ZERO, from: start, to: start, speed: 1.0, pause_after: initial_pause }];
        let mut here = start;
        for &(to, speed, pause) in waypoints {
            let depart = legs.last().map(Leg::next_depart).unwrap_or(SimTime::ZERO);
            if depart > end {
                break;
            }
            legs.push(Leg::new(depart, here, to, speed, pause));
            here = to;
        }
        WaypointTrace { node, legs, end }
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn end(&self) -> SimTime {
        self.end
    }

    pub fn initial_position(&self) -> Position {
        self.legs[0].from
    }

    /// Position at `t`; linear on a moving leg, the waypoint while paused.
    /// After the last leg the node stays at its final waypoint.
    pub fn position_at(&self, t: SimTime) -> Result<Position, Error> {
        if t > self.end {
            return Err(Error::OutOfTraceRange { t, end: self.end });
        }
        let idx = self.legs.partition_point(|l| l.depart <= t);
        // legs[0].depart == 0, so idx >= 1
        Ok(self.legs[idx - 1].position_at(t))
    }
}

/// Random waypoint: start at a uniform point, pause, then repeatedly travel at
/// `speed` to a uniform waypoint and pause there, until `duration` is covered.
pub fn random_waypoint_trace(
    node: NodeId,
    area: Area,
    speed: f64,
    pause: SimTime,
    duration: SimTime,
    rng: &mut RngStream,
) -> WaypointTrace {
    assert!(speed > 0.0 && area.width > 0.0 && area.height > 0.0);
    let start = area.random_point(rng);
    let mut legs = alloc::vec![Leg { depart: SimTime::ZERO, arrive: SimTime::ZERO, from: start, to: start, speed, pause_after: pause }];
    let mut here = start;
    loop {
        let depart = legs[legs.len() - 1].next_depart();
        if depart >= duration {
            break;
        }
        let to = area.random_point(rng);
        legs.push(Leg::new(depart, here, to, speed, pause));
        here = to;
    }
    WaypointTrace { node, legs, end: duration }
}
