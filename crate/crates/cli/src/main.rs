//! `graded-chain`: parameter sweeps, verification runs and CSV/JSON export.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use graded_chain::ChainError;

use config::{Command, Format, RunConfig};

/// Directory used for output files when `--output` is not given.
const OUT_DIR_ENV: &str = "GRADED_CHAIN_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Invalid(String),
    /// A verification threshold was exceeded; exit code 1.
    Failed(String),
}

impl CliError {
    pub fn invalid(field: &str, reason: impl std::fmt::Display) -> Self {
        CliError::Invalid(format!("invalid parameter `{field}`: {reason}"))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::VerificationFailed { .. } => CliError::Failed(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "graded-chain", version, about = "Exponentially graded linear chain: spectra, Green's functions, mode density, dynamics")]
struct Cli {
    /// JSON run configuration, or the JSON output of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; defaults to `$GRADED_CHAIN_OUT_DIR/<command>.<format>`, else stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Seed for random initial conditions and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid("config", format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))?;
    // JSON output embeds its configuration under "config".
    if let Some(inner) = value.get_mut("config").filter(|v| v.is_object()) {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let base = cli.config.as_deref().map(load_config).transpose()?;
    let command = match (cli.command, &base) {
        (Some(c), _) => c,
        (None, Some(b)) => b.command.clone(),
        (None, None) => return Err(CliError::invalid("command", "give a subcommand or --config")),
    };
    Ok(RunConfig {
        command,
        format: cli.format.or(base.as_ref().map(|b| b.format)).unwrap_or_default(),
        seed: cli.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        output: cli.output.or(base.and_then(|b| b.output)),
    })
}

fn destination(config: &RunConfig) -> Option<PathBuf> {
    config.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", config.command.name(), config.format.extension())))
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = resolve(cli)?;
    let report = commands::run(&config)?;
    let text = report.render(&config);
    match destination(&config) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::invalid("output", format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&path, text)
                .map_err(|e| CliError::invalid("output", format!("{}: {e}", path.display())))?;
        }
        None => print!("{text}"),
    }
    match report.failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
