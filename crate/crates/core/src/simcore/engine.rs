//! Event loop for one replication ("day").
//!
//! The future event list only ever holds one pending emission per source
//! and one pending departure per busy node, so it stays small. A departing
//! packet is handed to its parent's queue at the same instant.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;
use smallvec::SmallVec;

use super::node::{estimate_overflow, NodeState, Packet};
use super::source::{Emission, SourceProcess};
use crate::error::SimError;
use crate::model::SourceParams;
use crate::rng::{open_unit, stream, Stream, StreamId};
use crate::topology::{validate_topology, NodeId, NodeRole, TopologySpec};

/// Timing of a replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    /// Simulated time at which the run stops (s).
    pub horizon_s: f64,
    /// Packets created at or before this time are excluded from statistics.
    pub warmup_s: f64,
    /// Keep a per-hop trace of every packet.
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon_s: 90_000.0,
            warmup_s: 3_600.0,
            trace: false,
        }
    }
}

impl RunConfig {
    pub fn measured_span(&self) -> f64 {
        self.horizon_s - self.warmup_s
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.warmup_s >= 0.0 && self.warmup_s < self.horizon_s && self.horizon_s.is_finite()) {
            return Err(SimError::Config(format!(
                "need 0 <= warmup ({}) < horizon ({})",
                self.warmup_s, self.horizon_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub node_id: NodeId,
    pub role: NodeRole,
    pub mean_delay_s: f64,
    pub throughput_pps: f64,
    pub overflow_prob: f64,
    pub overflow_undefined: bool,
    pub mean_queue_len: f64,
    pub arrivals: u64,
    pub departures: u64,
    pub measured_arrivals: u64,
    pub in_system_at_end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub cluster_id: u32,
    /// Mean creation-to-sink-departure time of delivered packets.
    pub e2e_delay_s: f64,
    /// Mean time spent at the sink by this cluster's packets.
    pub sink_delay_s: f64,
    /// Measured packets entering the cluster's first node, per second.
    pub throughput_pps: f64,
    /// Measured packets leaving the sink, per second.
    pub delivered_pps: f64,
    pub emitted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub day: u32,
    pub seed: u64,
    pub nodes: Vec<NodeReport>,
    pub clusters: Vec<ClusterReport>,
    /// Mean e2e delay over every packet delivered by the sink.
    pub sink_e2e_delay_s: f64,
    /// Some node's mean offered load reaches its service rate.
    pub saturated: bool,
    pub emitted: u64,
    /// Wall-clock seconds; the only nondeterministic field.
    pub runtime_s: f64,
}

impl ReplicationResult {
    pub fn node(&self, id: NodeId) -> Option<&NodeReport> {
        self.nodes.iter().find(|n| n.node_id == id)
    }

    pub fn cluster(&self, id: u32) -> Option<&ClusterReport> {
        self.clusters.iter().find(|c| c.cluster_id == id)
    }

    pub fn sink(&self) -> &NodeReport {
        self.nodes
            .iter()
            .find(|n| n.role == NodeRole::Sink)
            .expect("replication without a sink")
    }

    /// Equality ignoring wall-clock runtime.
    pub fn same_outcome(&self, other: &Self) -> bool {
        ReplicationResult {
            runtime_s: 0.0,
            ..self.clone()
        } == ReplicationResult {
            runtime_s: 0.0,
            ..other.clone()
        }
    }
}

/// One hop of one packet, as written to the optional trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub packet_id: u64,
    pub source_id: u32,
    pub cluster_id: u32,
    pub created_at: f64,
    pub hop_node: NodeId,
    pub arrive: f64,
    pub depart: f64,
    pub size_bytes: f64,
}

pub const TRACE_HEADER: &str = "packet_id,source_id,cluster_id,created_at,hop_node,arrive,depart,size_bytes";

pub fn write_trace<W: Write>(rows: &[TraceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.9},{},{:.9},{:.9},{:.3}",
            r.packet_id, r.source_id, r.cluster_id, r.created_at, r.hop_node, r.arrive, r.depart, r.size_bytes
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Emit(u32),
    Depart(u32),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    node: NodeId,
    packet: u64,
    kind: Kind,
}

impl Event {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.node.cmp(&other.node))
            .then(self.packet.cmp(&other.packet))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that BinaryHeap pops the earliest event.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

struct Source {
    process: SourceProcess,
    pending: Option<(u64, Emission)>,
    global_id: u32,
    cluster_idx: usize,
    attach_idx: u32,
}

#[derive(Default, Clone)]
struct ClusterAcc {
    emitted: u64,
    measured_in: u64,
    delivered: u64,
    e2e_sum: f64,
    sink_sum: f64,
}

struct Engine<'a> {
    cfg: &'a RunConfig,
    heap: BinaryHeap<Event>,
    nodes: Vec<NodeState>,
    parent: Vec<Option<u32>>,
    service: Vec<Stream>,
    sources: Vec<Source>,
    clusters: Vec<ClusterAcc>,
    next_packet: u64,
    trace: Option<Vec<TraceRow>>,
}

impl Engine<'_> {
    fn schedule_emission(&mut self, s: usize) {
        let src = &mut self.sources[s];
        src.pending = src.process.next().map(|e| {
            let id = self.next_packet;
            self.next_packet += 1;
            (id, e)
        });
        if let Some((id, e)) = src.pending {
            let node = self.nodes[src.attach_idx as usize].id;
            self.heap.push(Event {
                time: e.time,
                node,
                packet: id,
                kind: Kind::Emit(s as u32),
            });
        }
    }

    #[inline]
    fn start_service(&mut self, idx: usize, t: f64) {
        let node = &self.nodes[idx];
        let head = node.head().expect("service start on an empty node").id;
        let service = -open_unit(&mut self.service[idx]).ln() / node.service_rate;
        self.heap.push(Event {
            time: t + service,
            node: node.id,
            packet: head,
            kind: Kind::Depart(idx as u32),
        });
    }

    #[inline]
    fn arrive(&mut self, idx: usize, pkt: Packet, t: f64) {
        if self.nodes[idx].arrive(pkt, t) {
            self.start_service(idx, t);
        }
    }

    fn run(&mut self) {
        let warmup = self.cfg.warmup_s;
        let horizon = self.cfg.horizon_s;
        for s in 0..self.sources.len() {
            self.schedule_emission(s);
        }
        while let Some(ev) = self.heap.pop() {
            let t = ev.time;
            if t >= horizon {
                break;
            }
            match ev.kind {
                Kind::Emit(s) => {
                    let s = s as usize;
                    let src = &self.sources[s];
                    let (id, e) = src.pending.expect("emission event without a pending packet");
                    let (attach, cluster_idx) = (src.attach_idx as usize, src.cluster_idx);
                    let pkt = Packet {
                        id,
                        source_id: src.global_id,
                        cluster_id: cluster_idx as u32 + 1,
                        created_at: t,
                        size_bytes: e.size_bytes,
                        hops: SmallVec::new(),
                    };
                    let acc = &mut self.clusters[cluster_idx];
                    acc.emitted += 1;
                    if t > warmup {
                        acc.measured_in += 1;
                    }
                    self.arrive(attach, pkt, t);
                    self.schedule_emission(s);
                }
                Kind::Depart(idx) => {
                    let idx = idx as usize;
                    let pkt = self.nodes[idx].depart(t);
                    if let Some(rows) = self.trace.as_mut() {
                        let hop = pkt.hops.last().expect("hop record");
                        rows.push(TraceRow {
                            packet_id: pkt.id,
                            source_id: pkt.source_id,
                            cluster_id: pkt.cluster_id,
                            created_at: pkt.created_at,
                            hop_node: hop.node,
                            arrive: hop.arrive,
                            depart: hop.depart,
                            size_bytes: pkt.size_bytes,
                        });
                    }
                    match self.parent[idx] {
                        Some(p) => self.arrive(p as usize, pkt, t),
                        None => {
                            if pkt.measured(warmup) {
                                let hop = pkt.hops.last().expect("hop record");
                                let acc = &mut self.clusters[pkt.cluster_id as usize - 1];
                                acc.delivered += 1;
                                acc.e2e_sum += pkt.end_to_end_delay();
                                acc.sink_sum += hop.depart - hop.arrive;
                            }
                        }
                    }
                    if !self.nodes[idx].is_empty() {
                        self.start_service(idx, t);
                    }
                }
            }
        }
        for n in &mut self.nodes {
            n.finish(horizon);
        }
    }
}

/// Runs one replication of `topology` with `sources[i]` driving every
/// source of cluster `i`. Identical inputs give identical results apart
/// from `runtime_s`.
pub fn run_replication(
    topology: &TopologySpec,
    sources: &[SourceParams],
    cfg: &RunConfig,
    seed: u64,
    day: u32,
) -> Result<ReplicationResult, SimError> {
    run_inner(topology, sources, cfg, seed, day).map(|(r, _)| r)
}

/// As [`run_replication`], also returning the per-hop trace when
/// `cfg.trace` is set.
pub fn run_replication_traced(
    topology: &TopologySpec,
    sources: &[SourceParams],
    cfg: &RunConfig,
    seed: u64,
    day: u32,
) -> Result<(ReplicationResult, Vec<TraceRow>), SimError> {
    run_inner(topology, sources, cfg, seed, day)
}

fn run_inner(
    topology: &TopologySpec,
    sources: &[SourceParams],
    cfg: &RunConfig,
    seed: u64,
    day: u32,
) -> Result<(ReplicationResult, Vec<TraceRow>), SimError> {
    let started = Instant::now();
    cfg.validate()?;
    let diags = validate_topology(topology);
    if !diags.is_empty() {
        let msg: Vec<String> = diags.iter().map(ToString::to_string).collect();
        return Err(SimError::Topology(msg.join("; ")));
    }
    if sources.len() != topology.clusters.len() {
        return Err(SimError::SourceCount {
            expected: topology.clusters.len(),
            got: sources.len(),
        });
    }

    let queue_specs: Vec<_> = topology.queue_nodes().collect();
    let index: BTreeMap<NodeId, u32> = queue_specs.iter().enumerate().map(|(i, n)| (n.id, i as u32)).collect();
    let nodes: Vec<NodeState> = queue_specs
        .iter()
        .map(|n| NodeState::new(n.id, n.service_rate, n.threshold, cfg.warmup_s))
        .collect();
    let parent = queue_specs
        .iter()
        .map(|n| topology.parent(n.id).map(|p| index[&p]))
        .collect();
    let service = queue_specs
        .iter()
        .map(|n| stream(seed, day, StreamId::Service(n.id)))
        .collect();

    let mut procs = Vec::new();
    let mut global_id = 0u32;
    for (ci, (cluster, params)) in topology.clusters.iter().zip(sources).enumerate() {
        let law = params.burst_law()?;
        for _ in 0..cluster.sources {
            procs.push(Source {
                process: SourceProcess::new(
                    params,
                    law,
                    stream(seed, day, StreamId::Source(global_id)),
                    cfg.horizon_s,
                ),
                pending: None,
                global_id,
                cluster_idx: ci,
                attach_idx: index[&cluster.attach],
            });
            global_id += 1;
        }
    }

    let mut engine = Engine {
        cfg,
        heap: BinaryHeap::with_capacity(procs.len() + queue_specs.len() + 1),
        nodes,
        parent,
        service,
        sources: procs,
        clusters: vec![ClusterAcc::default(); topology.clusters.len()],
        next_packet: 0,
        trace: cfg.trace.then(Vec::new),
    };
    engine.run();

    let span = cfg.measured_span();
    let per_second = |count: u64| count as f64 / span;
    let mean = |sum: f64, n: u64| if n == 0 { 0.0 } else { sum / n as f64 };

    let saturated = queue_specs.iter().any(|q| {
        let load: f64 = topology
            .clusters
            .iter()
            .zip(sources)
            .filter(|(c, _)| topology.path(c).contains(&q.id))
            .map(|(c, p)| p.k * f64::from(c.sources))
            .sum();
        load >= q.service_rate
    });

    let node_reports = engine
        .nodes
        .iter()
        .zip(&queue_specs)
        .map(|(n, spec)| {
            let overflow = estimate_overflow(n);
            NodeReport {
                node_id: n.id,
                role: spec.role,
                mean_delay_s: n.mean_delay(),
                throughput_pps: per_second(n.measured_arrivals),
                overflow_prob: overflow.probability,
                overflow_undefined: overflow.undefined,
                mean_queue_len: n.mean_queue_len(),
                arrivals: n.arrivals,
                departures: n.departures,
                measured_arrivals: n.measured_arrivals,
                in_system_at_end: n.len() as u64,
            }
        })
        .collect();
    let (all_sum, all_n) = engine
        .clusters
        .iter()
        .fold((0.0, 0), |(s, n), c| (s + c.e2e_sum, n + c.delivered));
    let cluster_reports = topology
        .clusters
        .iter()
        .zip(&engine.clusters)
        .map(|(spec, acc)| ClusterReport {
            cluster_id: spec.id,
            e2e_delay_s: mean(acc.e2e_sum, acc.delivered),
            sink_delay_s: mean(acc.sink_sum, acc.delivered),
            throughput_pps: per_second(acc.measured_in),
            delivered_pps: per_second(acc.delivered),
            emitted: acc.emitted,
        })
        .collect();

    let result = ReplicationResult {
        day,
        seed,
        nodes: node_reports,
        clusters: cluster_reports,
        sink_e2e_delay_s: mean(all_sum, all_n),
        saturated,
        emitted: engine.clusters.iter().map(|c| c.emitted).sum(),
        runtime_s: started.elapsed().as_secs_f64(),
    };
    Ok((result, engine.trace.unwrap_or_default()))
}
