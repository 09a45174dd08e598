//! Deterministic discrete-event simulator for mobile ad hoc networks.
//!
//! The crate is `no_std` (it only needs `alloc`) and contains everything that
//! is pure computation: the event queue, seeded random streams, random-waypoint
//! mobility, a unit-disk radio, three routing protocols and the metric
//! accounting. File formats, the command line and parallel sweeps live in the
//! `manet-lab` companion crate.
//!
//! Protocols:
//!
//! * [`aodv`]: reactive route discovery (RREQ flood, RREP on the reverse path,
//!   RERR on link breaks).
//! * [`gpsr`]: greedy geographic forwarding with Gabriel-graph perimeter
//!   recovery.
//! * [`crp`]: greedy geographic forwarding that falls back to a simplified AODV
//!   discovery anchored at the node where greedy forwarding got stuck.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod aodv;
pub mod crp;
pub mod error;
pub mod event;
pub mod geometry;
pub mod gpsr;
pub mod metrics;
pub mod mobility;
pub mod packet;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod time;
pub mod traffic;

pub use error::Error;
pub use geometry::Position;
pub use metrics::{DropCause, MetricsRow};
pub use packet::{NodeId, Packet, PacketKind};
pub use scenario::{run_one, ProtocolKind, Scenario};
pub use time::SimTime;
