//! Shared fixtures for the criterion benches.

use wsnburst_core::{build_star, derive_source_params, OffKind, OnKind, RunConfig, SourceParams, TopologySpec};

/// Single-source star at rho = 0.5 with the given burstiness and ON law.
pub fn star_fixture(b: f64, on: OnKind) -> (TopologySpec, SourceParams) {
    let topo = build_star(1, 50.0, 100.0, 1000).expect("valid star");
    let params = derive_source_params(50.0, 1, 50.0, b, on, OffKind::Exp).expect("valid source");
    (topo, params)
}

/// One simulated hour, no warm-up to speak of.
pub fn one_hour() -> RunConfig {
    RunConfig {
        horizon_s: 3_600.0,
        warmup_s: 60.0,
        trace: false,
    }
}
