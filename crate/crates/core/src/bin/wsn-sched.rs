//! Command line front end: topology/workload generation, single runs,
//! scenario sweeps, exact small-instance solving and trace auditing.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wsn_sched::gabas::GaParams;
use wsn_sched::harness::{
    self, Algorithm, ExperimentConfig, HarnessError,
};
use wsn_sched::oracle::{self, BruteForceLimits, MnpInstance};
use wsn_sched::resources::SharingMode;
use wsn_sched::simulator::{self, SimOptions};
use wsn_sched::topology::{generate_topology, Topology, TopologyParams};
use wsn_sched::workload::{
    generate_workload, workload_from_json, workload_to_json, Application, WorkloadParams,
};

#[derive(Parser)]
#[command(name = "wsn-sched", version, about = "Sensor network scheduling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random topology and write it as JSON.
    GenTopology(GenTopologyArgs),
    /// Generate an application workload for a topology and write it as JSON.
    GenWorkload(GenWorkloadArgs),
    /// Run one algorithm on one instance and print the metrics as JSON.
    Simulate(SimulateArgs),
    /// Run a scenario sweep and export CSV rows.
    Experiment(ExperimentArgs),
    /// Solve a small instance exactly (scheduling or number partitioning).
    Oracle(OracleArgs),
    /// Verify a recorded trace against an instance.
    Audit(AuditArgs),
}

#[derive(Args)]
struct TopologyFlags {
    #[arg(long, default_value_t = 1000)]
    width: i64,
    #[arg(long, default_value_t = 1000)]
    height: i64,
    #[arg(long, default_value_t = 300)]
    points: usize,
    #[arg(long, default_value_t = 250)]
    sensors: usize,
    #[arg(long, default_value_t = 30)]
    bases: usize,
}

impl TopologyFlags {
    fn params(&self) -> TopologyParams {
        TopologyParams {
            region_width: self.width,
            region_height: self.height,
            num_points: self.points,
            num_sensors: self.sensors,
            num_bases: self.bases,
            ..TopologyParams::default()
        }
    }
}

#[derive(Args)]
struct GenTopologyArgs {
    /// RNG seed; required so every artifact is reproducible.
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    flags: TopologyFlags,
    /// Use the desk-scale parameter set instead of the individual flags.
    #[arg(long, conflicts_with_all = ["width", "height", "points", "sensors", "bases"])]
    preset: Option<Preset>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenWorkloadArgs {
    #[arg(long)]
    seed: u64,
    /// Topology JSON the workload is generated against.
    #[arg(long)]
    topology: PathBuf,
    #[arg(long, default_value_t = 1000)]
    apps: usize,
    #[arg(long, default_value_t = 25)]
    batches: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Preset {
    Desk,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: u64,
    /// Topology JSON file. Mutually exclusive with --preset.
    #[arg(long, conflicts_with = "preset", requires = "workload")]
    topology: Option<PathBuf>,
    /// Workload JSON file. Mutually exclusive with --preset.
    #[arg(long, conflicts_with = "preset", requires = "topology")]
    workload: Option<PathBuf>,
    /// Generate the instance from the seed instead of reading files.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    algorithm: Algorithm,
    #[arg(long, default_value = "shared")]
    mode: SharingMode,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Record the event trace to this file (JSON lines).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    seed: u64,
    /// Scenario id, 1 through 6.
    #[arg(long, default_value_t = 1)]
    scenario: u8,
    /// Comma separated subset of gabas,lmpf,lmsf,ltsf,fcfs,sjf.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    /// Comma separated subset of shared,unshared.
    #[arg(long, value_delimiter = ',')]
    modes: Vec<SharingMode>,
    #[arg(long)]
    runs: Option<u32>,
    #[arg(long)]
    preset: Option<Preset>,
    /// key=value config file; flags given explicitly take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Result CSV path; default directory honors WSN_SCHED_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Companion CSV with per-run wall-clock times.
    #[arg(long)]
    timings: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Multiway number partitioning: comma separated numbers.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["topology", "workload"])]
    mnp: Vec<u64>,
    /// Partition count for --mnp.
    #[arg(long, requires = "mnp")]
    k: Option<usize>,
    /// Topology JSON for an exact scheduling solve.
    #[arg(long, requires = "workload")]
    topology: Option<PathBuf>,
    #[arg(long, requires = "topology")]
    workload: Option<PathBuf>,
    #[arg(long, default_value = "shared")]
    mode: SharingMode,
    #[arg(long, default_value_t = 8)]
    max_apps: usize,
    #[arg(long, default_value_t = 4)]
    max_choices: usize,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    workload: PathBuf,
    /// Trace in JSON lines form, as written by simulate --trace.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value = "shared")]
    mode: SharingMode,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::GenTopology(args) => gen_topology(args),
        Command::GenWorkload(args) => gen_workload(args),
        Command::Simulate(args) => simulate(args),
        Command::Experiment(args) => experiment(args),
        Command::Oracle(args) => oracle_cmd(args),
        Command::Audit(args) => audit(args),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_topology(path: &Path) -> Result<Topology, String> {
    Topology::from_json(&read_to_string(path)?).map_err(|e| e.to_string())
}

fn load_workload(path: &Path) -> Result<Vec<Application>, String> {
    workload_from_json(&read_to_string(path)?).map_err(|e| e.to_string())
}

fn gen_topology(args: GenTopologyArgs) -> Result<ExitCode, String> {
    let params = match args.preset {
        Some(Preset::Desk) => harness::desk_topology(),
        None => args.flags.params(),
    };
    let topo = generate_topology(&params, args.seed).map_err(|e| e.to_string())?;
    emit(&args.out, &topo.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn gen_workload(args: GenWorkloadArgs) -> Result<ExitCode, String> {
    let topo = load_topology(&args.topology)?;
    let params = WorkloadParams {
        app_count: args.apps,
        batch_count: args.batches,
        ..WorkloadParams::default()
    };
    let apps = generate_workload(&topo, &params, args.seed).map_err(|e| e.to_string())?;
    emit(&args.out, &workload_to_json(&apps))?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, String> {
    let (topo, apps) = match (&args.topology, &args.workload, args.preset) {
        (Some(t), Some(w), None) => (load_topology(t)?, load_workload(w)?),
        (None, None, Some(Preset::Desk)) => {
            let (topo_seed, wl_seed, _) = harness::run_seeds(args.seed, 0);
            let topo = generate_topology(&harness::desk_topology(), topo_seed)
                .map_err(|e| e.to_string())?;
            let apps = generate_workload(&topo, &harness::desk_workload(), wl_seed)
                .map_err(|e| e.to_string())?;
            (topo, apps)
        }
        _ => {
            return Err(
                "usage: give both --topology and --workload, or --preset desk".into(),
            )
        }
    };
    let (_, _, ga_seed) = harness::run_seeds(args.seed, 0);
    let schedule = harness::build_schedule(
        args.algorithm,
        &topo,
        &apps,
        args.mode,
        &GaParams::default(),
        ga_seed,
    )
    .map_err(|e| e.to_string())?;
    let opts = SimOptions {
        alpha: args.alpha,
        beta: args.beta,
        record_trace: args.trace.is_some(),
    };
    let outcome = simulator::run_with(&topo, &apps, &schedule, args.mode, &opts);
    if let Some(path) = &args.trace {
        std::fs::write(path, simulator::trace_to_jsonl(&outcome.trace))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let doc = serde_json::to_string_pretty(&outcome.metrics).expect("metrics serialize");
    emit(&args.out, &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode, String> {
    let mut config = match args.preset {
        Some(Preset::Desk) => ExperimentConfig::desk_preset(args.scenario, args.seed),
        None => ExperimentConfig::new(args.scenario, args.seed),
    }
    .map_err(|e| e.to_string())?;
    if let Some(path) = &args.config {
        let pairs = harness::parse_key_values(&read_to_string(path)?)
            .map_err(|e| e.to_string())?;
        harness::apply_key_values(&mut config, &pairs).map_err(|e| e.to_string())?;
        // flags win over the file
        config.base_seed = args.seed;
    }
    if !args.algorithms.is_empty() {
        config.algorithms = args.algorithms.clone();
    }
    if !args.modes.is_empty() {
        config.modes = args.modes.clone();
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    let rows = harness::run_experiment(&config).map_err(|e| match e {
        HarnessError::InvalidConfig(msg) => format!("usage: {msg}"),
        other => other.to_string(),
    })?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| harness::default_output_dir().join("results.csv"));
    std::fs::write(&out, harness::rows_to_csv(&rows))
        .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    if let Some(path) = &args.timings {
        std::fs::write(path, harness::timings_csv(&rows))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_cmd(args: OracleArgs) -> Result<ExitCode, String> {
    if !args.mnp.is_empty() {
        let k = args
            .k
            .ok_or_else(|| "usage: --mnp requires --k".to_string())?;
        let instance = MnpInstance {
            numbers: args.mnp.clone(),
            k,
        };
        let optimum = oracle::mnp_optimal(&instance).map_err(|e| e.to_string())?;
        println!("{optimum}");
        return Ok(ExitCode::SUCCESS);
    }
    match (&args.topology, &args.workload) {
        (Some(t), Some(w)) => {
            let topo = load_topology(t)?;
            let apps = load_workload(w)?;
            let limits = BruteForceLimits {
                max_apps: args.max_apps,
                max_choices_per_point: args.max_choices,
            };
            let optimum = oracle::brute_force_optimal_with(&topo, &apps, args.mode, &limits)
                .map_err(|e| e.to_string())?;
            println!("{optimum}");
            Ok(ExitCode::SUCCESS)
        }
        _ => Err("usage: give --mnp LIST --k K, or --topology and --workload".into()),
    }
}

fn audit(args: AuditArgs) -> Result<ExitCode, String> {
    let topo = load_topology(&args.topology)?;
    let apps = load_workload(&args.workload)?;
    let trace = simulator::trace_from_jsonl(&read_to_string(&args.trace)?)
        .map_err(|e| e.to_string())?;
    if simulator::audit(&topo, &apps, &trace, args.mode, args.alpha, args.beta) {
        println!("ok");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("violation");
        Ok(ExitCode::FAILURE)
    }
}
