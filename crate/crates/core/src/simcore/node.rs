//! FIFO infinite-buffer queueing node with exponential service.

use std::collections::VecDeque;

use smallvec::SmallVec;

use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub node: NodeId,
    pub arrive: f64,
    pub depart: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub source_id: u32,
    pub cluster_id: u32,
    pub created_at: f64,
    pub size_bytes: f64,
    pub hops: SmallVec<[Hop; 2]>,
}

impl Packet {
    /// Whether the packet counts toward statistics.
    pub fn measured(&self, warmup: f64) -> bool {
        self.created_at > warmup
    }

    pub fn end_to_end_delay(&self) -> f64 {
        self.hops.last().map_or(0.0, |h| h.depart - self.created_at)
    }
}

/// Queue contents and counters of one node. Counters for overflow and
/// delay only include measured (post-warm-up) packets.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub service_rate: f64,
    pub threshold: u64,
    queue: VecDeque<Packet>,
    warmup: f64,
    pub arrivals: u64,
    pub departures: u64,
    pub measured_arrivals: u64,
    pub overflow_hits: u64,
    pub delay_sum: f64,
    pub delay_count: u64,
    area: f64,
    last_change: f64,
    elapsed: f64,
}

impl NodeState {
    pub fn new(id: NodeId, service_rate: f64, threshold: u64, warmup: f64) -> Self {
        NodeState {
            id,
            service_rate,
            threshold,
            queue: VecDeque::new(),
            warmup,
            arrivals: 0,
            departures: 0,
            measured_arrivals: 0,
            overflow_hits: 0,
            delay_sum: 0.0,
            delay_count: 0,
            area: 0.0,
            last_change: 0.0,
            elapsed: 0.0,
        }
    }

    /// Packets in the node, including the one in service.
    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn head(&self) -> Option<&Packet> {
        self.queue.front()
    }

    #[inline]
    fn advance(&mut self, t: f64) {
        if t > self.warmup {
            let from = self.last_change.max(self.warmup);
            self.area += self.queue.len() as f64 * (t - from);
        }
        self.last_change = t;
    }

    /// Enqueues `pkt` at time `t`. Returns true when the node was idle and
    /// the packet goes straight into service.
    #[inline]
    pub fn arrive(&mut self, mut pkt: Packet, t: f64) -> bool {
        self.advance(t);
        self.arrivals += 1;
        if pkt.measured(self.warmup) {
            self.measured_arrivals += 1;
            if self.queue.len() as u64 >= self.threshold {
                self.overflow_hits += 1;
            }
        }
        pkt.hops.push(Hop {
            node: self.id,
            arrive: t,
            depart: f64::NAN,
        });
        self.queue.push_back(pkt);
        self.queue.len() == 1
    }

    /// Completes service of the head packet at time `t`.
    #[inline]
    pub fn depart(&mut self, t: f64) -> Packet {
        self.advance(t);
        let mut pkt = self.queue.pop_front().expect("departure from an empty node");
        self.departures += 1;
        let hop = pkt.hops.last_mut().expect("packet without a hop record");
        hop.depart = t;
        if pkt.created_at > self.warmup {
            self.delay_sum += t - hop.arrive;
            self.delay_count += 1;
        }
        pkt
    }

    /// Closes the queue-length integral at the end of the run.
    pub fn finish(&mut self, horizon: f64) {
        self.advance(horizon);
        self.elapsed = (horizon - self.warmup).max(0.0);
    }

    pub fn mean_delay(&self) -> f64 {
        if self.delay_count == 0 {
            0.0
        } else {
            self.delay_sum / self.delay_count as f64
        }
    }

    /// Time-average number in the node after warm-up (valid after `finish`).
    pub fn mean_queue_len(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.area / self.elapsed
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowEstimate {
    pub probability: f64,
    /// No measured arrivals; the probability is reported as 0.
    pub undefined: bool,
}

/// Fraction of measured arrivals that found at least `B` packets in the
/// node. Buffers are infinite, so nothing is dropped.
pub fn estimate_overflow(node: &NodeState) -> OverflowEstimate {
    if node.measured_arrivals == 0 {
        OverflowEstimate {
            probability: 0.0,
            undefined: true,
        }
    } else {
        OverflowEstimate {
            probability: node.overflow_hits as f64 / node.measured_arrivals as f64,
            undefined: false,
        }
    }
}
