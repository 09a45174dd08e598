use thiserror::Error;

use crate::packet::NodeId;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot schedule an event at {at} before the current time {now}")]
    SchedulingInPast { at: SimTime, now: SimTime },
    #[error("time {t} is past the end of the trace ({end})")]
    OutOfTraceRange { t: SimTime, end: SimTime },
    #[error("edge has zero length")]
    DegenerateEdge,
    #[error("packet {uid} delivered twice")]
    DuplicateDelivery { uid: u64 },
    #[error("packet {uid} settled but was never originated or already settled")]
    UnknownPacket { uid: u64 },
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: &'static str, reason: &'static str },
    #[error("node {0:?} does not exist")]
    NoSuchNode(NodeId),
}
