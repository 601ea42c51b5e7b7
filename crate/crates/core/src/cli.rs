//! Command-line front end: `run`, `sweep` and `forecast`.
//!
//! Every command loads and validates its config before touching the output
//! directory, so a bad config never leaves files behind.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::{BoundMode, ConfigError, ScenarioConfig};
use crate::output::{self, RunManifest};
use crate::sim::{forecast_at_step, run_episode, run_sweep, Outcome, SimError};

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "HRI_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "hri",
    version,
    about = "Danger-aware human-robot interaction planner"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one closed-loop episode and write its trace.
    Run(RunArgs),
    /// Repeat episodes over a list of values of one parameter.
    Sweep(SweepArgs),
    /// Dump the occupancy forecast computed at a given tick.
    Forecast(ForecastArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollisionMode {
    Exact,
    Marginal,
}

impl From<CollisionMode> for BoundMode {
    fn from(m: CollisionMode) -> Self {
        match m {
            CollisionMode::Exact => BoundMode::Exact,
            CollisionMode::Marginal => BoundMode::Marginal,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file (TOML).
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub collision_mode: Option<CollisionMode>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// Parameter name, e.g. `omega_h` or `robot.p_th`.
    #[arg(long)]
    pub param: String,
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub at_step: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config {
        path: String,
        #[source]
        source: ConfigError,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Sim(SimError::Config(_)) | CliError::Sim(SimError::StepOutOfRange { .. }) => {
                2
            }
            _ => 1,
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::load(path).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// What a command produced, for the one-line report on stdout.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Run {
        outcome: Outcome,
        steps: usize,
        trace: PathBuf,
    },
    Sweep {
        episodes: usize,
        table: PathBuf,
    },
    Forecast {
        table: PathBuf,
    },
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Report::Run {
                outcome,
                steps,
                trace,
            } => {
                write!(
                    f,
                    "{outcome} after {steps} steps; trace at {}",
                    trace.display()
                )
            }
            Report::Sweep { episodes, table } => {
                write!(f, "{episodes} episodes; table at {}", table.display())
            }
            Report::Forecast { table } => write!(f, "forecast at {}", table.display()),
        }
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<Report, CliError> {
    let mut cfg = load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.simulation.rng_seed = seed;
    }
    if let Some(mode) = args.collision_mode {
        cfg.prediction.bound_mode = mode.into();
    }
    let result = run_episode(&cfg)?;
    let trace_text = output::trace_to_string(&result, &cfg).map_err(io_err(&args.out))?;

    create_dir(&args.out)?;
    let trace = args.out.join("trace.csv");
    write(&trace, &trace_text)?;
    let manifest = args.out.join("manifest.toml");
    RunManifest::new("run", &args.config, &args.out, &cfg)
        .write(&manifest)
        .map_err(io_err(&manifest))?;
    Ok(Report::Run {
        outcome: result.outcome,
        steps: result.records.len(),
        trace,
    })
}

/// File name of one sweep episode's trace.
pub fn sweep_trace_name(value_index: usize, replication: usize) -> String {
    format!("trace_v{value_index}_r{replication}.csv")
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Report, CliError> {
    let cfg = load(&args.config)?;
    let report = run_sweep(&cfg, &args.param, &args.values, args.reps as usize)?;
    let table = output::sweep_to_string(&report).map_err(io_err(&args.out))?;
    let summary = output::sweep_summary_to_string(&report).map_err(io_err(&args.out))?;

    let traces = args.out.join("traces");
    create_dir(&traces)?;
    for row in &report.rows {
        let vi = args
            .values
            .iter()
            .position(|v| v.to_bits() == row.value.to_bits())
            .expect("row value comes from the list");
        let mut row_cfg = cfg.clone();
        row_cfg
            .set_param(&args.param, row.value)
            .map_err(SimError::from)?;
        let path = traces.join(sweep_trace_name(vi, row.replication));
        let text = output::trace_to_string(&row.episode, &row_cfg).map_err(io_err(&path))?;
        write(&path, &text)?;
    }
    let table_path = args.out.join("sweep.csv");
    write(&table_path, &table)?;
    write(&args.out.join("sweep_summary.csv"), &summary)?;
    let manifest = args.out.join("manifest.toml");
    RunManifest::new("sweep", &args.config, &args.out, &cfg)
        .write(&manifest)
        .map_err(io_err(&manifest))?;
    Ok(Report::Sweep {
        episodes: report.rows.len(),
        table: table_path,
    })
}

pub fn cmd_forecast(args: &ForecastArgs) -> Result<Report, CliError> {
    let mut cfg = load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.simulation.rng_seed = seed;
    }
    let forecast = forecast_at_step(&cfg, args.at_step)?;
    let text =
        output::forecast_to_string(&forecast, &cfg.prediction.grid).map_err(io_err(&args.out))?;

    create_dir(&args.out)?;
    let table = args.out.join("forecast.csv");
    write(&table, &text)?;
    let manifest = args.out.join("manifest.toml");
    RunManifest::new("forecast", &args.config, &args.out, &cfg)
        .write(&manifest)
        .map_err(io_err(&manifest))?;
    Ok(Report::Forecast { table })
}

pub fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Forecast(a) => cmd_forecast(a),
    }
}
