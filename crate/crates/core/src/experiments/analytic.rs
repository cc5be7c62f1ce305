//! Closed-form tables behind the `analytic` subcommands.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dists::DistributionSpec;
use crate::error::ModelError;
use crate::model::{blowup_points, bulk_factor, mpd_bulk_limit, mpd_smooth_limit, BulkSizeLaw};

/// Blow-up points for each `rho`, one row per value.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupTable {
    pub n: u32,
    pub rows: Vec<(f64, Vec<f64>)>,
}

pub fn blowup_table(n: u32, rhos: &[f64]) -> Result<BlowupTable, ModelError> {
    let rows = rhos
        .iter()
        .map(|&rho| blowup_points(n, rho).map(|b| (rho, b)))
        .collect::<Result<_, _>>()?;
    Ok(BlowupTable { n, rows })
}

impl BlowupTable {
    fn render(&self, sep: &str) -> String {
        let mut out = String::from("rho");
        for i in 1..=self.n {
            let _ = write!(out, "{sep}b_{i}");
        }
        out.push('\n');
        for (rho, bs) in &self.rows {
            let _ = write!(out, "{rho:.6}");
            for b in bs {
                let _ = write!(out, "{sep}{b:.6}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.render("  ")
    }

    pub fn to_csv(&self) -> String {
        self.render(",")
    }
}

/// Parses `start:stop:step` into an inclusive list.
pub fn parse_range(s: &str) -> Result<Vec<f64>, ModelError> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ModelError::Domain {
            name: "rho-sweep",
            reason: format!("`{s}`: {e}"),
        })?;
    let [start, stop, step] = nums[..] else {
        return Err(ModelError::Domain {
            name: "rho-sweep",
            reason: format!("expected start:stop:step, got `{s}`"),
        });
    };
    if !(step > 0.0 && stop >= start) {
        return Err(ModelError::Domain {
            name: "rho-sweep",
            reason: format!("need step > 0 and stop >= start in `{s}`"),
        });
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Burst-size law given on the command line as `geom:<mean>` or
/// `det:<size>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawArg {
    Geometric(f64),
    Deterministic(f64),
}

impl FromStr for LawArg {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::Domain {
            name: "law",
            reason: format!("expected geom:<n_p> or det:<L>, got `{s}`"),
        };
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match kind {
            "geom" => Ok(LawArg::Geometric(value)),
            "det" => Ok(LawArg::Deterministic(value)),
            _ => Err(bad()),
        }
    }
}

impl LawArg {
    pub fn law(&self) -> Result<BulkSizeLaw, ModelError> {
        match *self {
            LawArg::Geometric(m) => BulkSizeLaw::geometric(m),
            LawArg::Deterministic(l) => BulkSizeLaw::discretized(DistributionSpec::deterministic(l)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub smooth_s: f64,
    pub bulk_s: f64,
    pub bulk_factor: f64,
}

pub fn limits(v: f64, rho: f64, law: LawArg) -> Result<Limits, ModelError> {
    let law = law.law()?;
    Ok(Limits {
        smooth_s: mpd_smooth_limit(v, rho)?,
        bulk_s: mpd_bulk_limit(v, rho, &law)?,
        bulk_factor: bulk_factor(&law)?.value,
    })
}

impl Limits {
    pub fn to_text(&self) -> String {
        format!(
            "mpd_smooth_s  {:.6}\nmpd_bulk_s    {:.6}\nbulk_factor   {:.6}\n",
            self.smooth_s, self.bulk_s, self.bulk_factor
        )
    }

    pub fn to_csv(&self) -> String {
        format!(
            "mpd_smooth_s,mpd_bulk_s,bulk_factor\n{},{},{}\n",
            self.smooth_s, self.bulk_s, self.bulk_factor
        )
    }
}
