//! Single-threaded event queue ordered by `(fire_at, seq)`.

use alloc::collections::{BTreeSet, BinaryHeap};
use core::cmp::Ordering;

use crate::error::Error;
use crate::time::SimTime;

/// Identifies a scheduled event so it can be cancelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventHandle(u64);

impl EventHandle {
    pub fn seq(self) -> u64 {
        self.0
    }
}

struct Entry<E> {
    fire_at: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // BinaryHeap is a max-heap; invert so the earliest (fire_at, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.fire_at, other.seq).cmp(&(self.fire_at, self.seq))
    }
}

pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<E>>,
    live: BTreeSet<u64>,
    dispatched: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            live: BTreeSet::new(),
            dispatched: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of events still pending.
    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    /// Total number of events dispatched so far.
    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn schedule(&mut self, fire_at: SimTime, payload: E) -> Result<EventHandle, Error> {
        if fire_at < self.now {
            return Err(Error::SchedulingInPast { at: fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { fire_at, seq, payload });
        self.live.insert(seq);
        Ok(EventHandle(seq))
    }

    /// Schedules `delay` after the current time; cannot fail.
    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> EventHandle {
        let at = self.now + delay;
        self.schedule(at, payload).expect("now + delay is never in the past")
    }

    /// Returns `true` if the event was still pending.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.live.remove(&handle.0)
    }

    pub fn is_pending(&self, handle: EventHandle) -> bool {
        self.live.contains(&handle.0)
    }

    pub fn next_fire_time(&mut self) -> Option<SimTime> {
        self.discard_cancelled();
        self.heap.peek().map(|e| e.fire_at)
    }

    fn discard_cancelled(&mut self) {
        while let Some(top) = self.heap.peek() {
            if self.live.contains(&top.seq) {
                break;
            }
            self.heap.pop();
        }
    }

    /// Pops the next event with `fire_at <= t_end` and advances the clock to it.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        self.discard_cancelled();
        if self.heap.peek()?.fire_at > t_end {
            return None;
        }
        let entry = self.heap.pop()?;
        self.live.remove(&entry.seq);
        self.now = entry.fire_at;
        self.dispatched += 1;
        Some((entry.fire_at, entry.payload))
    }

    /// Dispatches every event with `fire_at <= t_end`, including events the
    /// handler schedules along the way, then sets the clock to `t_end`.
    /// Returns the number of dispatched events.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> usize
    where
        F: FnMut(&mut Self, E),
    {
        let mut count = 0;
        while let Some((_, payload)) = self.pop_until(t_end) {
            handler(self, payload);
            count += 1;
        }
        if t_end > self.now {
            self.now = t_end;
        }
        count
    }
}
