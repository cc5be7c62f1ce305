//! Sweep configuration: JSON loading, defaults and validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ModelError};
use crate::model::{derive_source_params, EmissionMode, OffKind, OnKind, SourceParams};
use crate::simcore::RunConfig;
use crate::topology::{build_case2, build_case3, build_star, TopologySpec};

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 1;

/// Burst-parameter grid, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BGrid {
    pub start: f64,
    pub stop: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

impl BGrid {
    /// Grid values, rounded to 1e-9 so that `0.05 + 2 * 0.05` prints as 0.15.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink_service_rate: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OnRepr {
    Name(String),
    Full(OnKind),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OffRepr {
    Name(String),
    Full(OffKind),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyRepr {
    case: u8,
    #[serde(rename = "N")]
    n: Option<Vec<u32>>,
    #[serde(default)]
    overrides: Option<Overrides>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: Option<u8>,
    #[serde(rename = "N")]
    n: Option<Vec<u32>>,
    b: Option<BGrid>,
    on_kind: Option<OnRepr>,
    off_kind: Option<OffRepr>,
    n_p: Option<f64>,
    lambda_total: Option<f64>,
    rho: Option<f64>,
    v: Option<f64>,
    #[serde(rename = "B")]
    threshold: Option<u64>,
    horizon_s: Option<f64>,
    warmup_s: Option<f64>,
    days: Option<u32>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    emission_mode: Option<EmissionMode>,
    trace: Option<bool>,
    overrides: Option<Overrides>,
    topology: Option<TopologyRepr>,
}

/// A validated sweep description. `lambda_total` is the aggregate rate of
/// one cluster and `v` the service rate of the first queue it feeds, so
/// `rho = lambda_total / v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub case: u8,
    #[serde(rename = "N")]
    pub n: Vec<u32>,
    pub b: BGrid,
    pub on_kind: OnKind,
    pub off_kind: OffKind,
    pub n_p: f64,
    pub lambda_total: f64,
    pub rho: f64,
    pub v: f64,
    #[serde(rename = "B")]
    pub threshold: u64,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub days: u32,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub emission_mode: EmissionMode,
    pub trace: bool,
    pub overrides: Overrides,
}

impl SimConfig {
    /// Case 1 sweep with every optional field at its default.
    pub fn new(case: u8, n: Vec<u32>, b: BGrid, on_kind: OnKind) -> Result<Self, ConfigError> {
        let cfg = SimConfig {
            case,
            n,
            b,
            on_kind,
            off_kind: OffKind::Exp,
            n_p: 50.0,
            lambda_total: 50.0,
            rho: 0.5,
            v: 100.0,
            threshold: 1000,
            horizon_s: 90_000.0,
            warmup_s: 3_600.0,
            days: 10,
            seed: DEFAULT_SEED,
            output_dir: None,
            emission_mode: EmissionMode::default(),
            trace: false,
            overrides: Overrides::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets `v` and recomputes `rho`.
    pub fn with_service_rate(mut self, v: f64) -> Result<Self, ConfigError> {
        self.v = v;
        self.rho = self.lambda_total / v;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=3).contains(&self.case) {
            return Err(ConfigError::invalid("case", format!("must be 1, 2 or 3, got {}", self.case)));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(ConfigError::invalid("N", "must be a non-empty list of positive integers"));
        }
        let g = &self.b;
        if !(g.step.is_finite() && g.step > 0.0) {
            return Err(ConfigError::invalid("b.step", format!("must be > 0, got {}", g.step)));
        }
        if !(g.start >= 0.0 && g.start < 1.0) {
            return Err(ConfigError::invalid("b.start", format!("must lie in [0, 1), got {}", g.start)));
        }
        if !(g.stop >= 0.0 && g.stop < 1.0) {
            return Err(ConfigError::invalid("b.stop", format!("must lie in [0, 1), got {}", g.stop)));
        }
        if g.stop < g.start {
            return Err(ConfigError::invalid("b.stop", "must not be below b.start"));
        }
        positive("n_p", self.n_p)?;
        positive("lambda_total", self.lambda_total)?;
        positive("v", self.v)?;
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(ConfigError::invalid("rho", format!("must lie in (0, 1), got {}", self.rho)));
        }
        if self.threshold == 0 {
            return Err(ConfigError::invalid("B", "must be at least 1"));
        }
        positive("horizon_s", self.horizon_s)?;
        if !(self.warmup_s > 0.0 && self.warmup_s < self.horizon_s) {
            return Err(ConfigError::invalid(
                "warmup_s",
                format!("need 0 < warmup_s ({}) < horizon_s ({})", self.warmup_s, self.horizon_s),
            ));
        }
        if self.days == 0 {
            return Err(ConfigError::invalid("days", "must be at least 1"));
        }
        if let Some(v) = self.overrides.sink_service_rate {
            positive("overrides.sink_service_rate", v)?;
        }
        Ok(())
    }

    pub fn b_values(&self) -> Vec<f64> {
        self.b.values()
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            horizon_s: self.horizon_s,
            warmup_s: self.warmup_s,
            trace: self.trace,
        }
    }

    pub fn topology(&self, n: u32) -> Result<TopologySpec, ModelError> {
        let sink = self.overrides.sink_service_rate;
        match self.case {
            1 => build_star(n, self.lambda_total, sink.unwrap_or(self.v), self.threshold),
            2 => build_case2(n, self.lambda_total, self.rho, self.threshold, sink),
            _ => build_case3(n, self.lambda_total, self.rho, self.threshold, sink),
        }
    }

    /// Parameters shared by every source of every cluster at one sweep point.
    pub fn source_params(&self, n: u32, b: f64) -> Result<SourceParams, ModelError> {
        derive_source_params(self.lambda_total, n, self.n_p, b, self.on_kind, self.off_kind)
            .map(|p| p.with_emission_mode(self.emission_mode))
    }

    pub fn clusters(&self) -> usize {
        match self.case {
            1 => 1,
            2 => 2,
            _ => 3,
        }
    }
}

fn positive(field: &'static str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be a positive number, got {x}")))
    }
}

fn on_kind(repr: OnRepr) -> Result<OnKind, ConfigError> {
    match repr {
        OnRepr::Full(k) => Ok(k),
        OnRepr::Name(s) => match s.as_str() {
            "exp" => Ok(OnKind::Exp),
            "pareto" => Ok(OnKind::pareto()),
            "tpt" => Err(ConfigError::invalid("on_kind", "tpt needs an object with `T`, e.g. {\"kind\":\"tpt\",\"T\":30}")),
            other => Err(ConfigError::invalid("on_kind", format!("unknown kind `{other}`"))),
        },
    }
}

fn off_kind(repr: OffRepr) -> Result<OffKind, ConfigError> {
    match repr {
        OffRepr::Full(k) => Ok(k),
        OffRepr::Name(s) => match s.as_str() {
            "exp" => Ok(OffKind::Exp),
            "pareto" => Ok(OffKind::pareto()),
            other => Err(ConfigError::invalid("off_kind", format!("unknown kind `{other}`"))),
        },
    }
}

/// Parses and validates a configuration held in memory.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let (case, n, overrides) = match raw.topology {
        Some(t) => {
            if raw.case.is_some() {
                return Err(ConfigError::invalid("case", "given both at top level and inside `topology`"));
            }
            if t.n.is_some() && raw.n.is_some() {
                return Err(ConfigError::invalid("N", "given both at top level and inside `topology`"));
            }
            if t.overrides.is_some() && raw.overrides.is_some() {
                return Err(ConfigError::invalid("overrides", "given both at top level and inside `topology`"));
            }
            (Some(t.case), t.n.or(raw.n), t.overrides.or(raw.overrides))
        }
        None => (raw.case, raw.n, raw.overrides),
    };
    let case = case.ok_or_else(|| ConfigError::invalid("case", "missing"))?;
    let n = n.ok_or_else(|| ConfigError::invalid("N", "missing"))?;
    let b = raw.b.ok_or_else(|| ConfigError::invalid("b", "missing"))?;
    let on = on_kind(raw.on_kind.ok_or_else(|| ConfigError::invalid("on_kind", "missing"))?)?;

    let lambda_total = raw.lambda_total.unwrap_or(50.0);
    let (rho, v) = match (raw.rho, raw.v) {
        (Some(rho), Some(v)) => {
            if (lambda_total / v - rho).abs() > 1e-9 {
                return Err(ConfigError::invalid(
                    "rho",
                    format!("inconsistent with v: lambda_total / v = {}", lambda_total / v),
                ));
            }
            (rho, v)
        }
        (Some(rho), None) => (rho, lambda_total / rho),
        (None, Some(v)) => (lambda_total / v, v),
        (None, None) => (lambda_total / 100.0, 100.0),
    };

    let cfg = SimConfig {
        case,
        n,
        b,
        on_kind: on,
        off_kind: raw.off_kind.map(off_kind).transpose()?.unwrap_or(OffKind::Exp),
        n_p: raw.n_p.unwrap_or(50.0),
        lambda_total,
        rho,
        v,
        threshold: raw.threshold.unwrap_or(1000),
        horizon_s: raw.horizon_s.unwrap_or(90_000.0),
        warmup_s: raw.warmup_s.unwrap_or(3_600.0),
        days: raw.days.unwrap_or(10),
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        output_dir: raw.output_dir,
        emission_mode: raw.emission_mode.unwrap_or_default(),
        trace: raw.trace.unwrap_or(false),
        overrides: overrides.unwrap_or_default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"case":1,"N":[1],"b":{"start":0.05,"stop":0.95,"step":0.05},"on_kind":"exp"}"#;

    #[test]
    fn minimal_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.horizon_s, 90_000.0);
        assert_eq!(c.warmup_s, 3_600.0);
        assert_eq!(c.days, 10);
        assert_eq!((c.v, c.rho), (100.0, 0.5));
        assert_eq!(c.b_values().len(), 19);
    }

    #[test]
    fn grid_values_are_clean() {
        let g = BGrid { start: 0.05, stop: 0.95, step: 0.05 };
        let v = g.values();
        assert_eq!(v[2], 0.15);
        assert_eq!(*v.last().unwrap(), 0.95);
        assert_eq!(BGrid { start: 0.5, stop: 0.5, step: 0.05 }.values(), vec![0.5]);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = r#"{"case":1,"N":[1],"b":{"start":0.05,"stop":1.0},"on_kind":"exp"}"#;
        assert!(matches!(parse_config(bad), Err(ConfigError::Invalid { field: "b.stop", .. })));
        let bad = r#"{"case":1,"N":[1],"b":{"start":0.5,"stop":0.5},"on_kind":"exp","warmup_s":10,"horizon_s":10}"#;
        assert!(matches!(parse_config(bad), Err(ConfigError::Invalid { field: "warmup_s", .. })));
        let bad = r#"{"case":1,"N":[1],"b":{"start":0.5,"stop":0.5},"on_kind":"exp","rho":0.5,"v":50}"#;
        assert!(matches!(parse_config(bad), Err(ConfigError::Invalid { field: "rho", .. })));
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = "{\"case\":1,\n\"N\":[1],\n\"bogus\":3}";
        match parse_config(text) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kinds_as_objects() {
        let text = r#"{"topology":{"case":2,"N":[1,2],"overrides":{"sink_service_rate":150}},
            "b":{"start":0.5,"stop":0.95},"on_kind":{"kind":"tpt","T":30},"off_kind":"pareto",
            "emission_mode":"poisson"}"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.case, 2);
        assert_eq!(c.on_kind, OnKind::tpt(30));
        assert_eq!(c.off_kind, OffKind::pareto());
        assert_eq!(c.overrides.sink_service_rate, Some(150.0));
        assert_eq!(c.emission_mode, EmissionMode::PoissonAtPeakRate);
        assert_eq!(c.topology(1).unwrap().node(0).unwrap().service_rate, 150.0);
    }
}
