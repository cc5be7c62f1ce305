//! Sweep execution and the `results.csv` / `summary.csv` / manifest writers.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::SimConfig;
use super::plotdata::{emit_plotdata, PlotSpec};
use crate::error::{RunError, SimError};
use crate::rng::derive_seed;
use crate::simcore::{run_replication_traced, write_trace, MetricStats, ReplicationResult};

/// Metrics reported per row, in column order.
pub const ROW_METRICS: [&str; 4] = ["mpd_s", "e2e_delay_s", "throughput_pps", "overflow_prob"];

pub const RESULTS_HEADER: &str =
    "case,N,b,on_kind,T,off_kind,day,entity,mpd_s,e2e_delay_s,throughput_pps,overflow_prob,saturated,seed,status";
pub const SUMMARY_HEADER: &str = "case,N,b,on_kind,T,off_kind,entity,metric,days,mean,min,max,cv";

const SIG_DIGITS: i32 = 12;

/// Fixed-notation rendering with 12 significant digits. Non-finite values
/// render as an empty field.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99.. -> 10.0..).
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > SIG_DIGITS as usize && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

/// Value as it will read back from the CSV.
fn rounded(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().expect("formatted number parses")
    } else {
        f64::NAN
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub case: u8,
    pub n: u32,
    pub b: f64,
    pub on_kind: String,
    pub truncation: u32,
    pub off_kind: String,
    pub day: u32,
    pub entity: String,
    pub mpd_s: f64,
    pub e2e_delay_s: f64,
    pub throughput_pps: f64,
    pub overflow_prob: f64,
    pub saturated: bool,
    pub seed: u64,
    /// `ok`, or `failed: <reason>` with the metrics left empty.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "mpd_s" => Some(self.mpd_s),
            "e2e_delay_s" => Some(self.e2e_delay_s),
            "throughput_pps" => Some(self.throughput_pps),
            "overflow_prob" => Some(self.overflow_prob),
            _ => None,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.case,
            self.n,
            fmt_num(self.b),
            self.on_kind,
            self.truncation,
            self.off_kind,
            self.day,
            self.entity,
            fmt_num(self.mpd_s),
            fmt_num(self.e2e_delay_s),
            fmt_num(self.throughput_pps),
            fmt_num(self.overflow_prob),
            self.saturated as u8,
            self.seed,
            self.status
        )
    }
}

/// Across-day statistics of one metric for one entity at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub case: u8,
    pub n: u32,
    pub b: f64,
    pub on_kind: String,
    pub truncation: u32,
    pub off_kind: String,
    pub entity: String,
    pub metric: &'static str,
    pub stats: MetricStats,
}

impl SummaryRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.case,
            self.n,
            fmt_num(self.b),
            self.on_kind,
            self.truncation,
            self.off_kind,
            self.entity,
            self.metric,
            self.stats.n,
            fmt_num(self.stats.mean),
            fmt_num(self.stats.min),
            fmt_num(self.stats.max),
            fmt_num(self.stats.cv)
        )
    }
}

/// Seed of sweep point `(n, b_index)`; days draw their streams from it.
pub fn point_seed(master: u64, n: u32, b_index: usize) -> u64 {
    derive_seed(master, (u64::from(n) << 32) | b_index as u64)
}

/// Measured entities of a case, in row order.
pub fn entities(case: u8) -> Vec<String> {
    let mut out: Vec<String> = match case {
        1 => Vec::new(),
        2 => (1..=2).map(|c| format!("cluster{c}")).collect(),
        _ => (1..=3).map(|c| format!("cluster{c}")).collect(),
    };
    out.push("sink".to_string());
    out
}

#[derive(Debug, Clone, Copy)]
struct Job {
    n: u32,
    b_index: usize,
    b: f64,
    day: u32,
    seed: u64,
}

fn jobs(cfg: &SimConfig) -> Vec<Job> {
    let bs = cfg.b_values();
    let mut out = Vec::with_capacity(cfg.n.len() * bs.len() * cfg.days as usize);
    for &n in &cfg.n {
        for (b_index, &b) in bs.iter().enumerate() {
            let seed = point_seed(cfg.seed, n, b_index);
            for day in 0..cfg.days {
                out.push(Job { n, b_index, b, day, seed });
            }
        }
    }
    out
}

fn run_job(cfg: &SimConfig, job: &Job, trace_dir: Option<&Path>) -> Result<ReplicationResult, String> {
    let topo = cfg.topology(job.n).map_err(|e| e.to_string())?;
    let params = cfg.source_params(job.n, job.b).map_err(|e| e.to_string())?;
    let sources = vec![params; topo.clusters.len()];
    let (res, trace) =
        run_replication_traced(&topo, &sources, &cfg.run_config(), job.seed, job.day).map_err(|e| e.to_string())?;
    if let Some(dir) = trace_dir {
        let path = dir.join(format!("trace_N{}_b{:02}_day{:02}.csv", job.n, job.b_index, job.day));
        let file = File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_trace(&trace, BufWriter::new(file)).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(res)
}

fn rows_for(cfg: &SimConfig, job: &Job, outcome: &Result<ReplicationResult, String>) -> Vec<SweepRow> {
    let base = |entity: String| SweepRow {
        case: cfg.case,
        n: job.n,
        b: job.b,
        on_kind: cfg.on_kind.label().to_string(),
        truncation: cfg.on_kind.truncation(),
        off_kind: cfg.off_kind.label().to_string(),
        day: job.day,
        entity,
        mpd_s: f64::NAN,
        e2e_delay_s: f64::NAN,
        throughput_pps: f64::NAN,
        overflow_prob: f64::NAN,
        saturated: false,
        seed: job.seed,
        status: "ok".to_string(),
    };
    let r = match outcome {
        Ok(r) => r,
        Err(reason) => {
            let reason: String = reason.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
            return entities(cfg.case)
                .into_iter()
                .map(|e| SweepRow {
                    status: format!("failed: {reason}"),
                    ..base(e)
                })
                .collect();
        }
    };

    let mut out = Vec::new();
    if cfg.case > 1 {
        let topo = cfg.topology(job.n).expect("topology built once already");
        for cluster in &topo.clusters {
            let node = r.node(cluster.attach).expect("attach node reported");
            let c = r.cluster(cluster.id).expect("cluster reported");
            out.push(SweepRow {
                mpd_s: rounded(node.mean_delay_s),
                e2e_delay_s: rounded(c.e2e_delay_s),
                throughput_pps: rounded(c.throughput_pps),
                overflow_prob: rounded(node.overflow_prob),
                saturated: r.saturated,
                ..base(format!("cluster{}", cluster.id))
            });
        }
    }
    let sink = r.sink();
    out.push(SweepRow {
        mpd_s: rounded(sink.mean_delay_s),
        e2e_delay_s: rounded(r.sink_e2e_delay_s),
        throughput_pps: rounded(sink.throughput_pps),
        overflow_prob: rounded(sink.overflow_prob),
        saturated: r.saturated,
        ..base("sink".to_string())
    });
    out
}

fn execute(cfg: &SimConfig, parallel: usize, trace_dir: Option<&Path>) -> Result<Vec<SweepRow>, RunError> {
    let jobs = jobs(cfg);
    info!(
        "running {} replications ({} N values x {} b values x {} days)",
        jobs.len(),
        cfg.n.len(),
        cfg.b_values().len(),
        cfg.days
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<ReplicationResult, String>> =
        pool.install(|| jobs.par_iter().map(|j| run_job(cfg, j, trace_dir)).collect());

    let mut rows = Vec::new();
    for (job, outcome) in jobs.iter().zip(&outcomes) {
        if let Err(e) = outcome {
            warn!("N={} b={} day={} failed: {e}", job.n, job.b, job.day);
        }
        rows.extend(rows_for(cfg, job, outcome));
    }
    Ok(rows)
}

/// Runs every replication of the sweep and returns the rows without
/// touching the filesystem.
pub fn sweep_rows(cfg: &SimConfig, parallel: usize) -> Result<Vec<SweepRow>, RunError> {
    let mut quiet = cfg.clone();
    quiet.trace = false;
    execute(&quiet, parallel, None)
}

/// Across-day statistics of the `ok` rows, grouped by (N, b, entity) in
/// first-seen order.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(&SweepRow, Vec<&SweepRow>)> = Vec::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        match groups
            .iter_mut()
            .find(|(k, _)| k.n == r.n && k.b == r.b && k.entity == r.entity)
        {
            Some((_, members)) => members.push(r),
            None => groups.push((r, vec![r])),
        }
    }
    let mut out = Vec::new();
    for (key, members) in groups {
        for metric in ROW_METRICS {
            let values: Vec<f64> = members.iter().map(|r| r.metric(metric).expect("known metric")).collect();
            out.push(SummaryRow {
                case: key.case,
                n: key.n,
                b: key.b,
                on_kind: key.on_kind.clone(),
                truncation: key.truncation,
                off_kind: key.off_kind.clone(),
                entity: key.entity.clone(),
                metric,
                stats: MetricStats::from_values(&values),
            });
        }
    }
    out
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<(), RunError> {
    let io_err = |source| RunError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "{header}").map_err(io_err)?;
    for line in lines {
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_results(path: &Path, rows: &[SweepRow]) -> Result<(), RunError> {
    write_lines(path, RESULTS_HEADER, rows.iter().map(SweepRow::to_csv))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), RunError> {
    write_lines(path, SUMMARY_HEADER, rows.iter().map(SummaryRow::to_csv))
}

fn manifest(cfg: &SimConfig, rows: usize) -> String {
    let points: Vec<_> = cfg
        .n
        .iter()
        .flat_map(|&n| {
            cfg.b_values()
                .into_iter()
                .enumerate()
                .map(move |(i, b)| serde_json::json!({"N": n, "b": b, "seed": point_seed(cfg.seed, n, i)}))
        })
        .collect();
    let doc = serde_json::json!({
        "config": cfg,
        "master_seed": cfg.seed,
        "points": points,
        "rows": rows,
        "versions": {
            "wsnburst-core": env!("CARGO_PKG_VERSION"),
            "csv_significant_digits": SIG_DIGITS,
        },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    s.push('\n');
    s
}

/// Everything a finished sweep wrote.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Runs the sweep and writes `results.csv`, `summary.csv`, the plot files
/// and `run_manifest.json` under `out_dir`.
pub fn run_sweep(cfg: &SimConfig, out_dir: &Path, parallel: usize) -> Result<SweepOutcome, RunError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let trace_dir = if cfg.trace {
        let d = out_dir.join("traces");
        fs::create_dir_all(&d).map_err(io_err(&d))?;
        Some(d)
    } else {
        None
    };

    let rows = execute(cfg, parallel, trace_dir.as_deref())?;
    let summary = summarize(&rows);

    let results = out_dir.join("results.csv");
    write_results(&results, &rows)?;
    let summary_path = out_dir.join("summary.csv");
    write_summary(&summary_path, &summary)?;
    let mut files = vec![results, summary_path];

    let plots = out_dir.join("plots");
    fs::create_dir_all(&plots).map_err(io_err(&plots))?;
    files.extend(emit_plotdata(&summary, &PlotSpec::mean_delay(), &plots)?);

    let manifest_path = out_dir.join("run_manifest.json");
    fs::write(&manifest_path, manifest(cfg, rows.len())).map_err(io_err(&manifest_path))?;
    files.push(manifest_path);

    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    let mut msg = format!("{} rows written to {}", rows.len(), out_dir.display());
    if failed > 0 {
        let _ = write!(msg, " ({failed} failed)");
    }
    info!("{msg}");
    Ok(SweepOutcome { rows, summary, files })
}
