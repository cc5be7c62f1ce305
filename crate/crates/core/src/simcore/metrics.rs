//! Across-day aggregation of replication results.

use std::collections::BTreeMap;

use serde::Serialize;

use super::engine::ReplicationResult;

/// Mean, extremes and coefficient of variation of one metric across days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStats {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation over the mean; 0 for a single value or a
    /// zero mean.
    pub cv: f64,
}

impl MetricStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MetricStats {
                n,
                mean: 0.0,
                min: 0.0,
                max: 0.0,
                cv: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cv = if n < 2 || mean == 0.0 || min == max {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            var.sqrt() / mean.abs()
        };
        MetricStats { n, mean, min, max, cv }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanDelay,
    E2eDelay,
    SinkDelay,
    Throughput,
    OverflowProb,
    MeanQueueLen,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::MeanDelay => "mpd_s",
            Metric::E2eDelay => "e2e_delay_s",
            Metric::SinkDelay => "sink_delay_s",
            Metric::Throughput => "throughput_pps",
            Metric::OverflowProb => "overflow_prob",
            Metric::MeanQueueLen => "mean_queue_len",
        }
    }
}

/// Measured entity inside a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Entity {
    Node(u32),
    Cluster(u32),
}

/// Per-day results kept as-is plus statistics for every (entity, metric).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub days: Vec<ReplicationResult>,
    pub stats: BTreeMap<(Entity, Metric), MetricStats>,
}

impl AggregateReport {
    pub fn get(&self, entity: Entity, metric: Metric) -> Option<&MetricStats> {
        self.stats.get(&(entity, metric))
    }
}

fn observations(r: &ReplicationResult) -> Vec<((Entity, Metric), f64)> {
    let mut out = Vec::new();
    for n in &r.nodes {
        let e = Entity::Node(n.node_id);
        out.push(((e, Metric::MeanDelay), n.mean_delay_s));
        out.push(((e, Metric::Throughput), n.throughput_pps));
        out.push(((e, Metric::OverflowProb), n.overflow_prob));
        out.push(((e, Metric::MeanQueueLen), n.mean_queue_len));
    }
    for c in &r.clusters {
        let e = Entity::Cluster(c.cluster_id);
        out.push(((e, Metric::E2eDelay), c.e2e_delay_s));
        out.push(((e, Metric::SinkDelay), c.sink_delay_s));
        out.push(((e, Metric::Throughput), c.throughput_pps));
    }
    out
}

pub fn collect_metrics(results: &[ReplicationResult]) -> AggregateReport {
    let mut columns: BTreeMap<(Entity, Metric), Vec<f64>> = BTreeMap::new();
    for r in results {
        for (key, v) in observations(r) {
            columns.entry(key).or_default().push(v);
        }
    }
    AggregateReport {
        days: results.to_vec(),
        stats: columns
            .into_iter()
            .map(|(k, vs)| (k, MetricStats::from_values(&vs)))
            .collect(),
    }
}
