//! Configuration ingestion, parameter sweeps, CSV and plot-data output, and
//! the closed-form tables used by the command line.

pub mod analytic;
pub mod config;
pub mod plotdata;
pub mod sweep;

pub use analytic::{blowup_table, limits, parse_range, BlowupTable, LawArg, Limits};
pub use config::{load_config, parse_config, BGrid, Overrides, SimConfig};
pub use plotdata::{emit_plotdata, PlotSpec};
pub use sweep::{
    entities, fmt_num, point_seed, run_sweep, summarize, sweep_rows, write_results, write_summary, SummaryRow,
    SweepOutcome, SweepRow, RESULTS_HEADER, SUMMARY_HEADER,
};
