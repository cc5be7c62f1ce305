use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use wsnburst_core::experiments::{blowup_table, limits, load_config, parse_range, run_sweep, LawArg};
use wsnburst_core::{ConfigError, RunError};

/// Burst-traffic queueing model and simulator for sensor networks.
#[derive(Parser)]
#[command(name = "wsnburst", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form tables.
    Analytic {
        #[command(subcommand)]
        kind: Analytic,
    },
    /// Run a sweep described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's day count.
        #[arg(long)]
        days: Option<u32>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum Analytic {
    /// Burstiness values where the queue blows up.
    Blowup {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        rho: f64,
        /// Also tabulate rho over start:stop:step.
        #[arg(long)]
        rho_sweep: Option<String>,
        /// Write the table as CSV as well.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Mean packet delay in the smooth and bulk limits.
    Limits {
        #[arg(long)]
        v: f64,
        #[arg(long)]
        rho: f64,
        /// geom:<n_p> or det:<L>
        #[arg(long)]
        law: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => c.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn write_csv(path: &Option<PathBuf>, body: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, body).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn analytic(kind: Analytic) -> Result<(), Failure> {
    // Bad analytic parameters are usage errors, like a bad config.
    let domain = |e: wsnburst_core::ModelError| Failure::Config(e.to_string());
    match kind {
        Analytic::Blowup { n, rho, rho_sweep, csv } => {
            let mut rhos = vec![rho];
            if let Some(s) = rho_sweep {
                rhos.extend(parse_range(&s).map_err(domain)?);
            }
            let table = blowup_table(n, &rhos).map_err(domain)?;
            print!("{}", table.to_text());
            write_csv(&csv, &table.to_csv())
        }
        Analytic::Limits { v, rho, law, csv } => {
            let law: LawArg = law.parse().map_err(domain)?;
            let l = limits(v, rho, law).map_err(domain)?;
            print!("{}", l.to_text());
            write_csv(&csv, &l.to_csv())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analytic { kind } => analytic(kind),
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!(
                "ok: case {}, {} N values, {} b values, {} days",
                cfg.case,
                cfg.n.len(),
                cfg.b_values().len(),
                cfg.days
            );
            Ok(())
        }
        Command::Simulate {
            config,
            out,
            seed,
            days,
            parallel,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = days {
                cfg.days = d;
                cfg.validate()?;
            }
            let outcome = run_sweep(&cfg, &out, parallel)?;
            let failed = outcome.failed_rows();
            println!("{} rows -> {}", outcome.rows.len(), out.join("results.csv").display());
            if failed > 0 {
                return Err(Failure::Runtime(format!("{failed} rows failed; see the status column")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            error!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            error!("{msg}");
            ExitCode::from(3)
        }
    }
}
