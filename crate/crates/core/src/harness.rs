//! Experiment runner: scenario sweeps, per-run metric rows, aggregate means
//! and deterministic CSV export.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gabas::{self, GaParams, GabasError};
use crate::greedy::{self, OrderingPolicy};
use crate::resources::SharingMode;
use crate::simulator::{self, AssignmentPolicy, RunMetrics, Schedule};
use crate::topology::{generate_topology, Topology, TopologyError, TopologyParams};
use crate::workload::{
    generate_workload, Application, ScenarioConfig, WorkloadError, WorkloadParams,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Gabas(#[from] GabasError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Gabas,
    Lmpf,
    Lmsf,
    Ltsf,
    Fcfs,
    Sjf,
}

pub const ALL_ALGORITHMS: [Algorithm; 6] = [
    Algorithm::Gabas,
    Algorithm::Lmpf,
    Algorithm::Lmsf,
    Algorithm::Ltsf,
    Algorithm::Fcfs,
    Algorithm::Sjf,
];

impl Algorithm {
    /// The admission-order policy for the non-genetic algorithms.
    pub fn ordering(&self) -> Option<OrderingPolicy> {
        match self {
            Algorithm::Gabas => None,
            Algorithm::Lmpf => Some(OrderingPolicy::Lmpf),
            Algorithm::Lmsf => Some(OrderingPolicy::Lmsf),
            Algorithm::Ltsf => Some(OrderingPolicy::Ltsf),
            Algorithm::Fcfs => Some(OrderingPolicy::Fcfs),
            Algorithm::Sjf => Some(OrderingPolicy::Sjf),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gabas" => Ok(Algorithm::Gabas),
            "lmpf" => Ok(Algorithm::Lmpf),
            "lmsf" => Ok(Algorithm::Lmsf),
            "ltsf" => Ok(Algorithm::Ltsf),
            "fcfs" => Ok(Algorithm::Fcfs),
            "sjf" => Ok(Algorithm::Sjf),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Algorithm::Gabas => "gabas",
            Algorithm::Lmpf => "lmpf",
            Algorithm::Lmsf => "lmsf",
            Algorithm::Ltsf => "ltsf",
            Algorithm::Fcfs => "fcfs",
            Algorithm::Sjf => "sjf",
        };
        write!(f, "{name}")
    }
}

/// Builds the schedule one algorithm proposes for the given instance. The
/// genetic algorithm consumes `seed`; the ordering policies are
/// deterministic without it.
pub fn build_schedule(
    algorithm: Algorithm,
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
    ga: &GaParams,
    seed: u64,
) -> Result<Schedule, HarnessError> {
    match algorithm.ordering() {
        Some(policy) => Ok(Schedule {
            admission_order: greedy::order(policy, apps),
            policy: AssignmentPolicy::WorstFit,
        }),
        None => Ok(gabas::evolve(topo, apps, mode, ga, seed)?.best.schedule()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub topology: TopologyParams,
    pub workload: WorkloadParams,
    pub algorithms: Vec<Algorithm>,
    pub modes: Vec<SharingMode>,
    pub runs: u32,
    pub base_seed: u64,
    pub ga: GaParams,
}

impl ExperimentConfig {
    /// Full-scale configuration for one of the six sweep scenarios.
    pub fn new(scenario_id: u8, base_seed: u64) -> Result<ExperimentConfig, HarnessError> {
        Ok(ExperimentConfig {
            scenario: crate::workload::scenario_sweep(scenario_id)?,
            topology: TopologyParams::default(),
            workload: WorkloadParams::default(),
            algorithms: ALL_ALGORITHMS.to_vec(),
            modes: vec![SharingMode::Shared, SharingMode::Unshared],
            runs: 100,
            base_seed,
            ga: GaParams::default(),
        })
    }

    /// Reduced configuration sized for desk runs and CI: 200 applications,
    /// 100 sensors, 15 base stations, 100 points, 20 runs.
    pub fn desk_preset(scenario_id: u8, base_seed: u64) -> Result<ExperimentConfig, HarnessError> {
        let mut config = ExperimentConfig::new(scenario_id, base_seed)?;
        config.topology = desk_topology();
        config.workload = desk_workload();
        config.runs = 20;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::InvalidConfig("runs must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::InvalidConfig("no algorithms selected".into()));
        }
        if self.modes.is_empty() {
            return Err(HarnessError::InvalidConfig("no modes selected".into()));
        }
        if self.scenario.values.is_empty() {
            return Err(HarnessError::InvalidConfig("empty sweep".into()));
        }
        Ok(())
    }
}

pub fn desk_topology() -> TopologyParams {
    TopologyParams {
        region_width: 400,
        region_height: 400,
        num_points: 100,
        num_sensors: 100,
        num_bases: 15,
        ..TopologyParams::default()
    }
}

pub fn desk_workload() -> WorkloadParams {
    WorkloadParams {
        app_count: 200,
        duration_range: (70, 130),
        ..WorkloadParams::default()
    }
}

const WORKLOAD_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const GA_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// Seeds for the three random stages of one run.
pub fn run_seeds(base_seed: u64, run: u32) -> (u64, u64, u64) {
    let s = base_seed.wrapping_add(run as u64);
    (s, s ^ WORKLOAD_SALT, s ^ GA_SALT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Run,
    Mean,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: u8,
    pub swept_value: u64,
    pub algorithm: Algorithm,
    pub mode: SharingMode,
    pub kind: RowKind,
    /// Run index and its seed; absent on aggregate rows.
    pub run: Option<u32>,
    pub seed: Option<u64>,
    pub makespan: f64,
    pub avg_waiting: f64,
    pub avg_turnaround: f64,
    pub success_rate: f64,
    pub rejected: f64,
    /// Schedule construction time. Recorded on run rows only and kept out
    /// of the deterministic CSV; see `timings_csv`.
    pub wall_clock_ms: Option<f64>,
}

struct CellResult {
    metrics: RunMetrics,
    millis: f64,
}

fn execute_cell(
    algorithm: Algorithm,
    topo: &Topology,
    apps: &[Application],
    mode: SharingMode,
    ga: &GaParams,
    ga_seed: u64,
) -> Result<CellResult, HarnessError> {
    let started = Instant::now();
    let schedule = build_schedule(algorithm, topo, apps, mode, ga, ga_seed)?;
    let millis = started.elapsed().as_secs_f64() * 1e3;
    let metrics = simulator::run(topo, apps, &schedule, mode);
    Ok(CellResult { metrics, millis })
}

/// Executes the sweep: every swept value x run x algorithm x mode. Runs fan
/// out over a thread pool; rows come back in (value, algorithm, mode, run)
/// order with a mean row after each run group, independent of completion
/// order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    config.validate()?;
    let scenario = &config.scenario;

    // (value, run) units, evaluated in parallel, collected in order.
    let units: Vec<(usize, u32)> = scenario
        .values
        .iter()
        .enumerate()
        .flat_map(|(vi, _)| (0..config.runs).map(move |r| (vi, r)))
        .collect();
    let cells: Vec<Result<Vec<CellResult>, HarnessError>> = units
        .par_iter()
        .map(|&(vi, run)| {
            let mut topo_params = config.topology.clone();
            let mut wl_params = config.workload.clone();
            scenario.apply(scenario.values[vi], &mut topo_params, &mut wl_params);
            let (topo_seed, wl_seed, ga_seed) = run_seeds(config.base_seed, run);
            let topo = generate_topology(&topo_params, topo_seed)?;
            let apps = generate_workload(&topo, &wl_params, wl_seed)?;
            let mut out = Vec::with_capacity(config.algorithms.len() * config.modes.len());
            for &algorithm in &config.algorithms {
                for &mode in &config.modes {
                    out.push(execute_cell(algorithm, &topo, &apps, mode, &config.ga, ga_seed)?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut by_unit = Vec::with_capacity(cells.len());
    for cell in cells {
        by_unit.push(cell?);
    }

    let mut rows = Vec::new();
    for (vi, &value) in scenario.values.iter().enumerate() {
        for (ai, &algorithm) in config.algorithms.iter().enumerate() {
            for (mi, &mode) in config.modes.iter().enumerate() {
                let cell_index = ai * config.modes.len() + mi;
                let group_start = rows.len();
                for run in 0..config.runs {
                    let unit = vi * config.runs as usize + run as usize;
                    let result = &by_unit[unit][cell_index];
                    let m = &result.metrics;
                    rows.push(ResultRow {
                        scenario: scenario.scenario_id,
                        swept_value: value,
                        algorithm,
                        mode,
                        kind: RowKind::Run,
                        run: Some(run),
                        seed: Some(config.base_seed.wrapping_add(run as u64)),
                        makespan: m.makespan as f64,
                        avg_waiting: m.avg_waiting,
                        avg_turnaround: m.avg_turnaround,
                        success_rate: m.success_rate,
                        rejected: m.rejected.len() as f64,
                        wall_clock_ms: Some(result.millis),
                    });
                }
                rows.push(mean_row(&rows[group_start..]));
            }
        }
    }
    Ok(rows)
}

fn mean_row(group: &[ResultRow]) -> ResultRow {
    let n = group.len() as f64;
    let mean = |f: fn(&ResultRow) -> f64| group.iter().map(f).sum::<f64>() / n;
    let first = &group[0];
    ResultRow {
        scenario: first.scenario,
        swept_value: first.swept_value,
        algorithm: first.algorithm,
        mode: first.mode,
        kind: RowKind::Mean,
        run: None,
        seed: None,
        makespan: mean(|r| r.makespan),
        avg_waiting: mean(|r| r.avg_waiting),
        avg_turnaround: mean(|r| r.avg_turnaround),
        success_rate: mean(|r| r.success_rate),
        rejected: mean(|r| r.rejected),
        wall_clock_ms: None,
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "scenario",
    "swept_value",
    "algorithm",
    "mode",
    "kind",
    "run",
    "seed",
    "makespan",
    "avg_waiting",
    "avg_turnaround",
    "success_rate",
    "rejected",
];

fn opt_str<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes the rows to CSV. Fixed header and column order, decimal
/// point, no locale dependence; identical rows produce identical bytes.
/// Wall-clock times are deliberately excluded.
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        let kind = match row.kind {
            RowKind::Run => "run",
            RowKind::Mean => "mean",
        };
        writer
            .write_record([
                row.scenario.to_string(),
                row.swept_value.to_string(),
                row.algorithm.to_string(),
                row.mode.to_string(),
                kind.to_string(),
                opt_str(&row.run),
                opt_str(&row.seed),
                row.makespan.to_string(),
                row.avg_waiting.to_string(),
                row.avg_turnaround.to_string(),
                row.success_rate.to_string(),
                row.rejected.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Wall-clock companion export, one line per run row. Kept separate from
/// `rows_to_csv` because timings vary between invocations.
pub fn timings_csv(rows: &[ResultRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["scenario", "swept_value", "algorithm", "mode", "run", "wall_clock_ms"])
        .expect("in-memory write");
    for row in rows {
        if let (RowKind::Run, Some(ms)) = (row.kind, row.wall_clock_ms) {
            writer
                .write_record([
                    row.scenario.to_string(),
                    row.swept_value.to_string(),
                    row.algorithm.to_string(),
                    row.mode.to_string(),
                    opt_str(&row.run),
                    format!("{ms:.3}"),
                ])
                .expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Directory CSV files default to: `$WSN_SCHED_OUT` if set, else the
/// current directory.
pub fn default_output_dir() -> std::path::PathBuf {
    match std::env::var_os("WSN_SCHED_OUT") {
        Some(dir) if !dir.is_empty() => dir.into(),
        _ => ".".into(),
    }
}

/// Parses a `key = value` config file: one pair per line, `#` comments,
/// blank lines ignored. Later keys override earlier ones at the caller.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Applies config-file pairs onto an experiment config. Flag-style keys:
/// scenario, algorithms, modes, runs, seed.
pub fn apply_key_values(
    config: &mut ExperimentConfig,
    pairs: &[(String, String)],
) -> Result<(), HarnessError> {
    for (key, value) in pairs {
        let bad = |e: String| HarnessError::InvalidConfig(format!("{key}: {e}"));
        match key.as_str() {
            "scenario" => {
                let id: u8 = value.parse().map_err(|_| bad("not an integer".into()))?;
                config.scenario = crate::workload::scenario_sweep(id)?;
            }
            "algorithms" => {
                config.algorithms = value
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(bad)?;
            }
            "modes" => {
                config.modes = value
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(bad)?;
            }
            "runs" => {
                config.runs = value.parse().map_err(|_| bad("not an integer".into()))?;
            }
            "seed" => {
                config.base_seed = value.parse().map_err(|_| bad("not an integer".into()))?;
            }
            other => {
                return Err(HarnessError::InvalidConfig(format!("unknown key '{other}'")));
            }
        }
    }
    Ok(())
}
