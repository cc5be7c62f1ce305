//! Discrete-event simulation of ON/OFF sources feeding a tree of FIFO
//! exponential-service queues.

mod engine;
mod metrics;
mod node;
mod source;

pub use engine::{
    run_replication, run_replication_traced, write_trace, ClusterReport, NodeReport, ReplicationResult, RunConfig,
    TraceRow, TRACE_HEADER,
};
pub use metrics::{collect_metrics, AggregateReport, Entity, Metric, MetricStats};
pub use node::{estimate_overflow, Hop, NodeState, OverflowEstimate, Packet};
pub use source::{source_emit, Emission, SourceProcess, MEAN_PACKET_BYTES};
