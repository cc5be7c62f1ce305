//! gnuplot-ready `.dat` series and a matching plot script.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::sweep::{fmt_num, SummaryRow};
use crate::error::RunError;

/// Which summary rows become series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub metric: String,
    /// Entities to keep; empty keeps all.
    pub entities: Vec<String>,
    /// N values to keep; empty keeps all.
    pub n: Vec<u32>,
    pub log_y: bool,
}

impl PlotSpec {
    pub fn mean_delay() -> Self {
        PlotSpec {
            metric: "mpd_s".to_string(),
            entities: Vec::new(),
            n: Vec::new(),
            log_y: true,
        }
    }

    fn keeps(&self, r: &SummaryRow) -> bool {
        r.metric == self.metric
            && (self.entities.is_empty() || self.entities.contains(&r.entity))
            && (self.n.is_empty() || self.n.contains(&r.n))
    }
}

fn series_name(metric: &str, r: &SummaryRow) -> String {
    let kind = match r.on_kind.as_str() {
        "tpt" => format!("tpt{}", r.truncation),
        k => k.to_string(),
    };
    format!("{metric}_{}_N{}_{kind}", r.entity, r.n)
}

/// Writes one `<metric>_<entity>_N<n>_<kind>.dat` per series (columns
/// `b mean min max`, no header) plus `plot.gp`. Returns the written paths;
/// nothing is written when the filter matches no rows.
pub fn emit_plotdata(rows: &[SummaryRow], spec: &PlotSpec, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut series: Vec<(String, Vec<&SummaryRow>)> = Vec::new();
    for r in rows.iter().filter(|r| spec.keeps(r)) {
        let name = series_name(&spec.metric, r);
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, pts)) => pts.push(r),
            None => series.push((name, vec![r])),
        }
    }
    if series.is_empty() {
        warn!("no rows match plot filter for `{}`; no plot files written", spec.metric);
        return Ok(Vec::new());
    }

    let write = |path: &Path, body: &str| {
        fs::write(path, body).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })
    };

    let mut written = Vec::new();
    let mut script = String::new();
    let _ = writeln!(script, "set xlabel 'b'");
    let _ = writeln!(script, "set ylabel '{}'", spec.metric);
    if spec.log_y {
        let _ = writeln!(script, "set logscale y");
    }
    let _ = writeln!(script, "set key left top");
    let mut plot_lines = Vec::new();
    for (name, mut pts) in series {
        pts.sort_by(|a, b| a.b.total_cmp(&b.b));
        let mut body = String::new();
        for p in &pts {
            let s = &p.stats;
            let _ = writeln!(
                body,
                "{} {} {} {}",
                fmt_num(p.b),
                fmt_num(s.mean),
                fmt_num(s.min),
                fmt_num(s.max)
            );
        }
        let file = format!("{name}.dat");
        let path = dir.join(&file);
        write(&path, &body)?;
        written.push(path);
        let first = pts[0];
        plot_lines.push(format!(
            "'{file}' using 1:2 with linespoints title '{} N={} {}'",
            first.entity, first.n, first.on_kind
        ));
    }
    let _ = writeln!(script, "plot {}", plot_lines.join(", \\\n     "));
    let path = dir.join("plot.gp");
    write(&path, &script)?;
    written.push(path);
    Ok(written)
}
