mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Command;
use crate::config::RunConfig;
use crate::error::CliError;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid configuration, usage, band or IO error (including dt above the stability bound)
  3  numerical failure (contract violation, non-convergence, degenerate input)
  4  blow-up detected; the summary holds the time bracket
  5  scattering failed at some nodes; the summary holds the failure map
  6  a verification gate failed";

/// Config-driven experiments for the Novikov–Veselov family.
#[derive(Debug, Parser)]
#[command(name = "nvlab", version, after_help = EXIT_CODES)]
struct Cli {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, short, global = true, env = "NVLAB_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory; overrides the configured one.
    #[arg(long, short, global = true, env = "NVLAB_OUT")]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, short, global = true, env = "NVLAB_WORKERS")]
    workers: Option<usize>,

    /// Seed for every randomized component.
    #[arg(long, global = true, env = "NVLAB_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Integrate the configured model directly in time.
    Evolve,
    /// Scattering transform with the involution check.
    Scatter,
    /// Miura map and its Newton inverse on constrained fields.
    Miura,
    /// Positivity classification of a real potential.
    Spectrum,
    /// Scaled-ensemble sweep of the fixed-time and space-time ratios.
    GnScan,
    /// Run the verification gates at the configured resolution.
    Validate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Evolve => Command::Evolve,
            Cmd::Scatter => Command::Scatter,
            Cmd::Miura => Command::Miura,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::GnScan => Command::GnScan,
            Cmd::Validate => Command::Validate,
        }
    }
}

/// Merges the file, the flags and the environment into one configuration.
fn resolve(cli: &Cli) -> Result<(Command, RunConfig), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    let cmd = match (cli.command, cfg.command.as_deref()) {
        (Some(c), _) => Command::from(c),
        (None, Some(name)) => name.parse()?,
        (None, None) => {
            return Err(CliError::Config(
                "no command given on the command line or in the configuration".into(),
            ))
        }
    };
    cfg.command = Some(cmd.name().to_string());
    cfg.validate()?;
    Ok((cmd, cfg))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(output::DEFAULT_OUT));
    let status = match resolve(&cli) {
        Ok((cmd, cfg)) => output::execute(cmd, &cfg),
        Err(e) => {
            eprintln!("nvlab: {e}");
            let command = cli.command.map(|c| Command::from(c).name().to_string());
            output::write_error_summary(&out, command.as_deref(), &e);
            e.status()
        }
    };
    ExitCode::from(status.code() as u8)
}
