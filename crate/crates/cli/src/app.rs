//! Command-line entry points and exit-code policy.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use heol_core::{run_scenario, HeolError};

use crate::config::{self, ConfigError, RawConfig};
use crate::output::{self, MetricsReport, WriteError};

#[derive(Debug, Parser)]
#[command(name = "heol-sim", version, about = "Surface vessel guidance simulations with HEOL control")]
pub struct Cli {
    /// Accepted for script compatibility; the simulator has no random state.
    #[arg(long, global = true)]
    pub seedless: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file and write log.csv, metrics.json and SVG plots
    Run {
        config: PathBuf,
        out_dir: PathBuf,
        /// Override a config entry, e.g. `--set wind.fy=0` (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write the built-in reference scenarios as config files
    EmitScenarios { out_dir: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read config {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {}: {source}", path.display())]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("simulation diverged: {0}")]
    Diverged(HeolError),
    #[error("simulation failed: {0}")]
    Sim(HeolError),
    #[error("cannot write {0}")]
    Write(#[from] WriteError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Diverged(_) => 2,
            _ => 1,
        }
    }
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<heol_core::ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let config_err = |source| CliError::Config { path: path.into(), source };
    let mut raw = RawConfig::parse(&text).map_err(config_err)?;
    for o in overrides {
        raw.set_override(o).map_err(config_err)?;
    }
    raw.to_scenario().map_err(config_err)
}

/// Runs one scenario; returns the stdout summary line.
pub fn run(config_path: &Path, out_dir: &Path, overrides: &[String]) -> Result<String, CliError> {
    let cfg = load_config(config_path, overrides)?;
    let (log, metrics) = run_scenario(&cfg).map_err(|e| match e {
        HeolError::NonFiniteState { .. } => CliError::Diverged(e),
        other => CliError::Sim(other),
    })?;
    for t in log.singular_events.iter().take(5) {
        eprintln!("warning: heading reference undefined at t = {t}, previous heading held");
    }
    if log.singular_events.len() > 5 {
        eprintln!("warning: {} singular events in total", log.singular_events.len());
    }
    let report = MetricsReport::new(&cfg, &metrics, log.records.len());
    output::write_bundle(out_dir, &cfg, &log, &report)?;
    Ok(report.summary_line())
}

pub fn emit_scenarios(out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io_err = |source| WriteError { path: out_dir.into(), source };
    std::fs::create_dir_all(out_dir).map_err(io_err)?;
    let mut written = Vec::new();
    for (stem, description, cfg) in config::builtin_scenarios() {
        let path = out_dir.join(format!("{stem}.cfg"));
        let text = format!("# {description}\n{}", config::render(&cfg));
        output::write_atomic(&path, |w| w.write_all(text.as_bytes()))?;
        written.push(path);
    }
    Ok(written)
}

/// Parses `args` and executes the command, returning the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Run { config, out_dir, overrides } => {
            run(&config, &out_dir, &overrides).map(|line| println!("{line}"))
        }
        Command::EmitScenarios { out_dir } => emit_scenarios(&out_dir).map(|paths| {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
