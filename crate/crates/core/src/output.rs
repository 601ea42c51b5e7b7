//! On-disk formats: episode traces, forecast tables, sweep tables and run
//! manifests. All tables are comma-separated with a mandatory header row.
//! Floats are written in their shortest round-trip form, so equal values
//! always produce equal bytes and parsing a field recovers the exact value.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::grid::Grid;
use crate::prediction::OccupancyForecast;
use crate::sim::{EpisodeResult, SweepReport};

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn num(x: f64) -> String {
    // `{:?}` switches to exponent form for very small or large magnitudes.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

fn bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn axis_columns(prefix: &str, dim: usize) -> impl Iterator<Item = String> + '_ {
    (0..dim).map(move |i| format!("{prefix}_{i}"))
}

/// Header of the per-episode trace table.
pub fn trace_header(dim: usize, horizon: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(axis_columns("x_r", dim));
    h.extend(axis_columns("x_h", dim));
    h.extend(axis_columns("u_r", dim));
    h.extend(axis_columns("u_h", dim));
    h.push("d_r".into());
    h.push("p_aware".into());
    h.extend((1..=horizon).map(|k| format!("p_coll_{k}")));
    h.extend(axis_columns("x_r_est_human", dim));
    h.push("fallback_used".into());
    h
}

pub fn trace_to_string(result: &EpisodeResult, cfg: &ScenarioConfig) -> io::Result<String> {
    let dim = cfg.robot.start.dim();
    let horizon = result
        .records
        .first()
        .map_or(cfg.robot.t_r, |r| r.collision_profile.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trace_header(dim, horizon))
        .map_err(csv_err)?;
    for r in &result.records {
        let mut row = vec![r.t.to_string()];
        row.extend(r.x_r.coords().iter().map(|&v| num(v)));
        row.extend(r.x_h.coords().iter().map(|&v| num(v)));
        row.extend(r.u_r.components().iter().map(|&v| num(v)));
        row.extend(r.u_h.components().iter().map(|&v| num(v)));
        row.push(bit(r.d_r));
        row.push(num(r.p_aware));
        row.extend(r.collision_profile.iter().map(|&v| num(v)));
        row.extend(r.x_r_est_human.coords().iter().map(|&v| num(v)));
        row.push(bit(r.fallback_used));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn write_trace(path: &Path, result: &EpisodeResult, cfg: &ScenarioConfig) -> io::Result<()> {
    fs::write(path, trace_to_string(result, cfg)?)
}

/// Dense `k x cell` table of a forecast; the sink is the last row of each
/// step with an empty center.
pub fn forecast_to_string(forecast: &OccupancyForecast, grid: &Grid) -> io::Result<String> {
    let dim = grid.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k".to_string(), "cell".to_string()];
    header.extend(axis_columns("center", dim));
    header.extend(["mass", "mass_unaware", "mass_aware"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for k in 0..=forecast.horizon {
        let combined = forecast.combined(k);
        for (slot, &mass) in combined.iter().enumerate() {
            let mut row = vec![k.to_string()];
            if slot == forecast.sink() {
                row.push("sink".into());
                row.extend((0..dim).map(|_| String::new()));
            } else {
                row.push(slot.to_string());
                row.extend(grid.center_of(slot).into_iter().map(num));
            }
            row.push(num(mass));
            for chain in &forecast.chains {
                row.push(num(chain.get(k).map_or(0.0, |r| r[slot])));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn sweep_to_string(report: &SweepReport) -> io::Result<String> {
    let horizon = report.rows.first().map_or(0, |r| r.entropy.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "parameter",
        "value",
        "replication",
        "seed",
        "outcome",
        "steps_to_robot_goal",
        "steps",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=horizon).map(|k| format!("entropy_{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in &report.rows {
        let mut row = vec![
            report.parameter.clone(),
            num(r.value),
            r.replication.to_string(),
            r.seed.to_string(),
            r.episode.outcome.to_string(),
            r.episode
                .steps_to_robot_goal
                .map_or(String::new(), |s| s.to_string()),
            r.episode.records.len().to_string(),
        ];
        row.extend(r.entropy.iter().map(|&e| num(e)));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn sweep_summary_to_string(report: &SweepReport) -> io::Result<String> {
    let summaries = report.summaries();
    let horizon = summaries.first().map_or(0, |s| s.mean_entropy.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "parameter",
        "value",
        "runs",
        "collision_rate",
        "both_reached_rate",
        "robot_goal_rate",
        "mean_steps_to_robot_goal",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=horizon).map(|k| format!("entropy_{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for s in &summaries {
        let mut row = vec![
            report.parameter.clone(),
            num(s.value),
            s.runs.to_string(),
            num(s.collision_rate),
            num(s.both_reached_rate),
            num(s.robot_goal_rate),
            s.mean_steps_to_robot_goal.map_or(String::new(), num),
        ];
        row.extend(s.mean_entropy.iter().map(|&e| num(e)));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

/// Provenance written next to every output; `config` alone reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub seed: u64,
    pub tool_version: String,
    pub output_dir: String,
    pub config: ScenarioConfig,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: &Path,
        output_dir: &Path,
        config: &ScenarioConfig,
    ) -> Self {
        Self {
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            seed: config.simulation.rng_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            output_dir: output_dir.display().to_string(),
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let text = toml::to_string(self).map_err(io::Error::other)?;
        fs::write(path, text)
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(io::Error::other)
    }
}
