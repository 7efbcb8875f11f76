//! Command-line front end for the `ttw` library.
//!
//! Every subcommand reads a [`RunConfig`], applies the global flags, writes
//! its data files into `--out` and finishes with `config.json` (the
//! effective configuration, enough to rerun) and `meta.json` (timing and
//! version, the only place a timestamp appears).

pub mod commands;
pub mod config;
pub mod exit;
pub mod output;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::RunConfig;
use config::ParamOverrides;
use output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "ttw", version, about = "Spectrum, coherent states and classical orbits of the TTW potential")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "ttw-out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Rational k as "p/q", an integer or a decimal (converted exactly).
    #[arg(long, global = true)]
    pub k: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels up to emax with degeneracy classes (levels.csv).
    Spectrum {
        #[arg(long)]
        emax: Option<f64>,
    },
    /// A normalized eigenstate sampled on an (r, θ) grid (eigenstate.csv).
    Eigenstate {
        #[arg(long)]
        n_r: Option<usize>,
        #[arg(long)]
        l1: Option<usize>,
    },
    /// Coherent-state expectation values and coefficients (coherent.csv,
    /// coefficients.csv, snapshot_NNNN.csv).
    Coherent {
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        split: Option<f64>,
        /// Use the circular-orbit energy and split.
        #[arg(long)]
        circular: bool,
        #[arg(long)]
        snapshots: Option<usize>,
    },
    /// Integrated orbit and closure search (trajectory.csv, closure.json).
    Classical {
        #[arg(long)]
        periods: Option<f64>,
        #[arg(long)]
        closure_periods: Option<usize>,
    },
    /// Finite-difference and identity checks of every analytic formula
    /// (validate.json).
    Validate,
    #[command(name = "specfun-probe", hide = true)]
    SpecfunProbe {
        #[arg(long = "fn")]
        func: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 0..)]
        args: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Eigenstate { .. } => "eigenstate",
            Command::Coherent { .. } => "coherent",
            Command::Classical { .. } => "classical",
            Command::Validate => "validate",
            Command::SpecfunProbe { .. } => "specfun-probe",
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        match *self {
            Command::Spectrum { emax } => {
                if let Some(v) = emax {
                    cfg.spectrum.emax = v;
                }
            }
            Command::Eigenstate { n_r, l1 } => {
                if let Some(v) = n_r {
                    cfg.eigenstate.n_r = v;
                }
                if let Some(v) = l1 {
                    cfg.eigenstate.l1 = v;
                }
            }
            Command::Coherent { energy, split, circular, snapshots } => {
                if let Some(v) = energy {
                    cfg.coherent.energy = v;
                }
                if let Some(v) = split {
                    cfg.coherent.split = v;
                }
                if circular {
                    cfg.coherent.circular = true;
                }
                if let Some(v) = snapshots {
                    cfg.coherent.snapshots = v;
                }
            }
            Command::Classical { periods, closure_periods } => {
                if let Some(v) = periods {
                    cfg.classical.periods = v;
                }
                if let Some(v) = closure_periods {
                    cfg.classical.closure_periods = v;
                }
            }
            Command::Validate | Command::SpecfunProbe { .. } => {}
        }
    }
}

/// The configuration a run will use: file (or defaults), then flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&ParamOverrides {
        omega: cli.global.omega,
        alpha: cli.global.alpha,
        beta: cli.global.beta,
        k: cli.global.k.clone(),
    })?;
    cli.command.apply(&mut cfg);
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Command::SpecfunProbe { func, args } = &cli.command {
        for v in commands::specfun_probe(func, args)? {
            println!("{v:?}");
        }
        return Ok(());
    }
    let cfg = effective_config(cli)?;
    let mut out = OutDir::create(&cli.global.out)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    out.write_json("config.json", &cfg)?;
    let result = match cli.command {
        Command::Spectrum { .. } => commands::spectrum(&cfg, &mut out),
        Command::Eigenstate { .. } => commands::eigenstate(&cfg, &mut out),
        Command::Coherent { .. } => commands::coherent(&cfg, &mut out),
        Command::Classical { .. } => commands::classical(&cfg, &mut out),
        Command::Validate => commands::validate(&cfg, &mut out),
        Command::SpecfunProbe { .. } => unreachable!("handled above"),
    };
    let mut meta = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "params": commands::params_summary(&cfg.params),
        "files": out.written(),
    });
    match &result {
        Ok(summary) => meta["summary"] = summary.clone(),
        Err(e) => {
            meta["error"] = json!(format!("{e:#}"));
            meta["exit_code"] = json!(exit::code_for(e));
        }
    }
    out.write_json("meta.json", &meta)?;
    result.map(|_| ())
}
