//! Command-line driver: reads a preset and/or TOML config, runs one
//! simulation or analysis, and writes CSV tables and JSON summaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::fit::FitModel;
pub use config::{Config, Preset};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qcr", version, about = "Quantum-dot coherent-control revival simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML config merged over the preset (or the defaults).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for synthetic noise; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QCR_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form signal and envelope on a time grid.
    Analytic,
    /// Two-pulse delay scan, contrast, revival peaks and T₂*.
    Ramsey,
    /// Three-pulse echo scan and T₂.
    Echo,
    /// Fit a decay or scaling law to a two-column CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: FitModel,
    },
    /// Spectral inversion and coherence maps along the medium.
    Propagate,
    /// T₂ and T₂* along a bias or temperature axis, with law fits.
    Sweep,
}

const DEFAULT_OUT: &str = "out";

impl Cli {
    /// Effective configuration: preset, then config file, then `--seed`.
    pub fn config(&self) -> Result<Config, CliError> {
        let mut config = Config::load(self.preset, self.config.as_deref())?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

fn prepare_out(cli: &Cli, config: &Config) -> Result<PathBuf, CliError> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    output::write_text(&out.join("effective_config.toml"), &config.to_toml())?;
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let config = cli.config()?;
    if let Command::Fit { input, model } = &cli.command {
        let fit = commands::fit::run(&config, input, *model)?;
        let json = output::to_json(&fit);
        if let Some(out) = &cli.out {
            std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
            output::write_text(&out.join("fit.json"), &json)?;
        }
        print!("{json}");
        return Ok(());
    }
    let out = prepare_out(cli, &config)?;
    match cli.command {
        Command::Analytic => commands::analytic::run(&config, &out).map(|_| ()),
        Command::Ramsey => commands::scan::ramsey(&config, &out).map(|_| ()),
        Command::Echo => commands::scan::echo(&config, &out).map(|_| ()),
        Command::Propagate => commands::propagate::run(&config, &out).map(|_| ()),
        Command::Sweep => commands::sweep::run(&config, &out).map(|_| ()),
        Command::Fit { .. } => unreachable!("handled above"),
    }
}

/// Runs the parsed command on a pool of `--threads` workers.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.threads {
        None => dispatch(cli),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cli))
        }
    }
}
