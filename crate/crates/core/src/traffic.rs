//! Constant-bit-rate traffic between random node pairs.

use alloc::vec::Vec;

use crate::packet::NodeId;
use crate::rng::RngStream;
use crate::time::SimTime;

/// Start times are spread uniformly over this window after the warm-up.
pub const START_STAGGER: SimTime = SimTime::from_secs(10);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CbrStream {
    pub src: NodeId,
    pub dst: NodeId,
    pub packet_size: u32,
    pub interval: SimTime,
    pub start_at: SimTime,
    /// Inclusive: a packet due exactly at `stop_at` is still emitted.
    pub stop_at: SimTime,
}

impl CbrStream {
    /// Number of packets the stream offers.
    pub fn packet_count(&self) -> u64 {
        if self.start_at > self.stop_at {
            0
        } else {
            (self.stop_at - self.start_at).as_micros() / self.interval.as_micros() + 1
        }
    }

    /// Emission time of the `k`-th packet, if it falls inside the stream.
    pub fn emission(&self, k: u64) -> Option<SimTime> {
        let t = self.start_at + self.interval * k;
        (t <= self.stop_at && self.start_at <= self.stop_at).then_some(t)
    }
}

/// Draws `n_streams` source/destination pairs uniformly (never a self-pair)
/// and staggers their start times over `[warmup, warmup + START_STAGGER)`.
pub fn make_streams(
    n_streams: usize,
    n_nodes: u32,
    packet_size: u32,
    interval: SimTime,
    warmup: SimTime,
    stop_at: SimTime,
    rng: &mut RngStream,
) -> Vec<CbrStream> {
    assert!(n_nodes >= 2, "need at least two nodes");
    assert!(interval > SimTime::ZERO, "interval must be positive");
    (0..n_streams)
        .map(|_| {
            let src = rng.below(u64::from(n_nodes)) as u32;
            let mut dst = rng.below(u64::from(n_nodes) - 1) as u32;
            if dst >= src {
                dst += 1;
            }
            let start_at = warmup + SimTime::from_micros(rng.below(START_STAGGER.as_micros()));
            CbrStream { src: NodeId(src), dst: NodeId(dst), packet_size, interval, start_at, stop_at }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    #[test]
    fn two_nodes_force_the_pair() {
        let mut rng = rng_stream(1, "traffic");
        let s = make_streams(1, 2, 512, SimTime::from_millis(250), SimTime::ZERO, SimTime::from_secs(500), &mut rng);
        assert_eq!(s.len(), 1);
        assert!((s[0].src, s[0].dst) == (NodeId(0), NodeId(1)) || (s[0].src, s[0].dst) == (NodeId(1), NodeId(0)));
    }

    #[test]
    fn no_self_pairs_and_deterministic() {
        let gen = || {
            let mut rng = rng_stream(77, "traffic");
            make_streams(200, 30, 512, SimTime::from_millis(250), SimTime::ZERO, SimTime::from_secs(500), &mut rng)
        };
        let a = gen();
        assert_eq!(a, gen());
        assert!(a.iter().all(|s| s.src != s.dst && s.dst.0 < 30 && s.src.0 < 30));
        assert!(a.iter().all(|s| s.start_at < START_STAGGER));
    }

    // Oracle: walk the emission schedule and count.
    #[test]
    fn packet_count_matches_enumeration() {
        let mut rng = rng_stream(3, "traffic");
        let streams =
            make_streams(20, 30, 512, SimTime::from_millis(250), SimTime::ZERO, SimTime::from_secs(500), &mut rng);
        for s in &streams {
            let enumerated = (0..).map_while(|k| s.emission(k)).count() as u64;
            assert_eq!(s.packet_count(), enumerated);
            let oracle = (500.0 - s.start_at.as_secs_f64()) / 0.25;
            assert_eq!(s.packet_count(), libm::floor(oracle) as u64 + 1);
            assert!((1960..=2001).contains(&s.packet_count()));
        }
    }

    #[test]
    fn stream_starting_after_stop_is_empty() {
        let s = CbrStream {
            src: NodeId(0),
            dst: NodeId(1),
            packet_size: 512,
            interval: SimTime::from_millis(250),
            start_at: SimTime::from_secs(2),
            stop_at: SimTime::from_secs(1),
        };
        assert_eq!(s.packet_count(), 0);
        assert_eq!(s.emission(0), None);
    }
}
