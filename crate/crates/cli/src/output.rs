//! Output directory layout: the resolved config, its hash, the summary and
//! the diagnostics table.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::commands::{self, Command, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, ExitStatus};

pub const DEFAULT_OUT: &str = "nvlab-out";

#[derive(Debug, Serialize)]
struct Summary<'a> {
    command: Option<&'a str>,
    version: &'a str,
    config_hash: Option<&'a str>,
    status: &'a str,
    exit_code: i32,
    results: Value,
    warnings: Vec<String>,
    error: Option<String>,
}

fn write_summary(out: &Path, summary: &Summary) -> Result<(), CliError> {
    let json =
        serde_json::to_string_pretty(summary).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(out.join("summary.json"), json + "\n")?;
    Ok(())
}

/// Best effort: a failure before the run still leaves a summary behind.
pub fn write_error_summary(out: &Path, command: Option<&str>, err: &CliError) {
    let status = err.status();
    let summary = Summary {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: None,
        status: status.label(),
        exit_code: status.code(),
        results: Value::Null,
        warnings: Vec::new(),
        error: Some(err.to_string()),
    };
    if std::fs::create_dir_all(out).is_ok() {
        if let Err(e) = write_summary(out, &summary) {
            log::warn!("could not write the summary: {e}");
        }
    }
}

fn prepare(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    std::fs::create_dir_all(out)?;
    let text = toml::to_string(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(out.join("config.toml"), text)?;
    let hash = cfg.hash();
    std::fs::write(out.join("config.sha256"), format!("{hash}\n"))?;
    Ok(hash)
}

fn write_outcome(out: &Path, hash: &str, outcome: &Outcome) -> Result<(), CliError> {
    let file = File::create(out.join("diagnostics.csv"))?;
    nvlab::diagnostics::write_csv(file, &hash[..12], &outcome.reports)?;
    Ok(())
}

/// Runs `cmd` and writes every artifact; returns the process status.
pub fn execute(cmd: Command, cfg: &RunConfig) -> ExitStatus {
    let out: PathBuf = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
    {
        log::warn!("worker pool already initialized: {e}");
    }
    let hash = match prepare(cfg, &out) {
        Ok(h) => h,
        Err(e) => {
            eprintln!("nvlab: {e}");
            write_error_summary(&out, Some(cmd.name()), &e);
            return e.status();
        }
    };
    let result =
        commands::run(cmd, cfg, &out).and_then(|o| write_outcome(&out, &hash, &o).map(|()| o));
    let (status, summary) = match result {
        Ok(o) => {
            for w in &o.warnings {
                log::warn!("{w}");
            }
            let summary = Summary {
                command: Some(cmd.name()),
                version: env!("CARGO_PKG_VERSION"),
                config_hash: Some(&hash),
                status: o.status.label(),
                exit_code: o.status.code(),
                results: o.results,
                warnings: o.warnings,
                error: None,
            };
            (o.status, summary)
        }
        Err(e) => {
            eprintln!("nvlab: {e}");
            let status = e.status();
            let summary = Summary {
                command: Some(cmd.name()),
                version: env!("CARGO_PKG_VERSION"),
                config_hash: Some(&hash),
                status: status.label(),
                exit_code: status.code(),
                results: Value::Null,
                warnings: Vec::new(),
                error: Some(e.to_string()),
            };
            (status, summary)
        }
    };
    if let Err(e) = write_summary(&out, &summary) {
        eprintln!("nvlab: {e}");
        return e.status();
    }
    eprintln!("nvlab {cmd}: {} (exit {})", status.label(), status.code());
    status
}
