//! Traffic model and simulator for wireless sensor networks whose nodes
//! deliver data in bursts.
//!
//! * [`dists`]: exponential, Pareto and truncated power-tail laws.
//! * [`model`]: source parameters and closed-form delay limits.
//! * [`simcore`]: the discrete-event engine.
//! * [`topology`]: star and cluster-tree layouts.
//! * [`experiments`]: configuration, sweeps and CSV output.

pub mod dists;
pub mod error;
pub mod experiments;
pub mod model;
pub mod rng;
pub mod simcore;
pub mod topology;

pub use dists::{tpt_calibrate, DistributionSpec, Tpt};
pub use error::{ConfigError, ModelError, RunError, SimError};
pub use model::{
    blowup_points, bulk_factor, burstiness, derive_source_params, mpd_bulk_limit, mpd_smooth_limit, BulkFactor,
    BulkSizeLaw, EmissionMode, OffKind, OnKind, SinkParams, SourceParams,
};
pub use experiments::{load_config, run_sweep, SimConfig, SweepRow};
pub use simcore::{collect_metrics, run_replication, ReplicationResult, RunConfig};
pub use topology::{build_case2, build_case3, build_star, validate_topology, TopologySpec};
