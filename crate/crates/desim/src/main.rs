//! `desim`: placement studies, utilisation reports and one-shot placement.
//!
//! Exit codes: 0 success, 1 bad input, 2 internal failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use de_core::analysis::{worst_case_utilization, WcpuReading};
use de_core::controller::{Algorithm, BaselineRetry, ControllerState, DecisionDoc, RequestDoc};
use de_core::model::{
    enumerate_scenarios, parse_demands, parse_topology, FailureSetSpec, Topology, TrafficMatrix,
};
use de_core::sim::{run_study_from, StudyConfig, SubsetDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Parser)]
#[command(name = "desim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drive each placement algorithm to saturation over random workloads.
    Study(StudyArgs),
    /// Per-scenario and worst-case link utilisation of a demand matrix, as CSV.
    Report(ReportArgs),
    /// Place one request document and print the decision as JSON.
    Place(PlaceArgs),
    /// Validate a topology, and optionally demands and a request.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct Inputs {
    /// Topology file (JSON or text form).
    #[arg(long)]
    topology: PathBuf,
    /// Demand file (CSV or JSON) loaded as the starting matrix.
    #[arg(long)]
    demands: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// Comma-separated subset of de, random, latency.
    #[arg(long, default_value = "de,random,latency", value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 50.0)]
    bw_min: f64,
    #[arg(long, default_value_t = 500.0)]
    bw_max: f64,
    #[arg(long, default_value_t = 1.0)]
    util_cap: f64,
    /// Failure classes checked at admission: none, circuits, nodes, srlgs, all.
    #[arg(long, default_value = "none")]
    failure_sets: String,
    /// Workload site subsets: uniform, all, or fixed:K.
    #[arg(long, default_value = "uniform")]
    subset: SubsetDistribution,
    /// What a baseline does when its pick does not fit: pick (drop) or all (try the rest).
    #[arg(long, default_value = "pick")]
    retry: BaselineRetry,
    #[arg(long, default_value = "a")]
    wcpu_reading: WcpuReading,
    #[arg(long, default_value_t = 100_000)]
    max_workloads: usize,
    /// Output directory for study.csv.
    #[arg(long)]
    out: PathBuf,
    /// Also write traces/iter-K-ALGO.csv.
    #[arg(long)]
    traces: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value = "all")]
    failure_sets: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlaceArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Request document (JSON).
    #[arg(long)]
    request: PathBuf,
    #[arg(long, default_value = "de")]
    algorithm: Algorithm,
    /// Seed for the random baseline.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "a")]
    wcpu_reading: WcpuReading,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    request: Option<PathBuf>,
}

enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

type CliResult<T> = Result<T, Failure>;

fn input<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> CliResult<T> {
    r.map_err(|e| Failure::Input(e.into()))
}

fn internal<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> CliResult<T> {
    r.map_err(|e| Failure::Internal(e.into()))
}

fn read(path: &Path) -> CliResult<String> {
    input(fs::read_to_string(path).with_context(|| format!("reading {}", path.display())))
}

fn load(inputs: &Inputs) -> CliResult<(Arc<Topology>, TrafficMatrix)> {
    let p = &inputs.topology;
    let topo =
        input(parse_topology(&read(p)?).with_context(|| format!("parsing {}", p.display())))?;
    for w in topo.warnings() {
        eprintln!("warning: {w}");
    }
    let matrix = match &inputs.demands {
        Some(p) => input(
            parse_demands(&read(p)?, &topo).with_context(|| format!("parsing {}", p.display())),
        )?,
        None => TrafficMatrix::new(),
    };
    Ok((Arc::new(topo), matrix))
}

fn failure_spec(s: &str) -> CliResult<FailureSetSpec> {
    input(FailureSetSpec::parse_list(s).map_err(|m| anyhow!("--failure-sets: {m}")))
}

fn request(topo: &Topology, path: &Path) -> CliResult<de_core::controller::PlacementRequest> {
    let doc: RequestDoc = input(
        serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display())),
    )?;
    input(
        doc.resolve(topo)
            .with_context(|| format!("in {}", path.display())),
    )
}

fn study(args: StudyArgs) -> CliResult<()> {
    let (topo, matrix) = load(&args.inputs)?;
    let cfg = StudyConfig {
        seed: args.seed,
        iterations: args.iterations,
        algorithms: args.algorithms,
        bw_min_mbps: args.bw_min,
        bw_max_mbps: args.bw_max,
        util_cap: args.util_cap,
        failure_spec: failure_spec(&args.failure_sets)?,
        subset: args.subset,
        baseline_retry: args.retry,
        wcpu_reading: args.wcpu_reading,
        max_workloads: args.max_workloads,
    };
    input(cfg.validate())?;
    let report = match run_study_from(&topo, &matrix, &cfg) {
        Err(e @ de_core::sim::SimError::Config(_)) => return input(Err(e)),
        r => internal(r)?,
    };
    internal(report.write(&topo, &args.out, args.traces))?;
    print!("{}", report.to_table());
    let unsaturated: usize = report
        .iterations
        .iter()
        .flat_map(|it| &it.runs)
        .filter(|r| !r.saturated)
        .count();
    if unsaturated > 0 {
        eprintln!("warning: {unsaturated} run(s) hit --max-workloads before saturating");
    }
    Ok(())
}

fn report(args: ReportArgs) -> CliResult<()> {
    let (topo, matrix) = load(&args.inputs)?;
    let scenarios = enumerate_scenarios(&topo, &failure_spec(&args.failure_sets)?);
    let report = internal(worst_case_utilization(&topo, &matrix, &scenarios))?;
    for u in &report.unrouted {
        eprintln!(
            "warning: demand {} unroutable under {}",
            u.demand, u.scenario
        );
    }
    let csv = report.to_csv(&topo);
    match &args.out {
        Some(p) => internal(fs::write(p, csv).with_context(|| format!("writing {}", p.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn place(args: PlaceArgs) -> CliResult<()> {
    let (topo, matrix) = load(&args.inputs)?;
    let req = request(&topo, &args.request)?;
    let mut state = ControllerState::new(Arc::clone(&topo), matrix).with_reading(args.wcpu_reading);
    let decision = match args.algorithm {
        Algorithm::DemandEngineering => state.place(&req),
        Algorithm::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            state.place_random(&req, &mut rng, BaselineRetry::PickOnly)
        }
        Algorithm::LowestLatency => state.place_lowest_latency(&req, BaselineRetry::PickOnly),
    };
    let decision = internal(decision)?;
    let json = internal(serde_json::to_string_pretty(&DecisionDoc::new(
        &topo, &decision,
    )))?;
    println!("{json}");
    Ok(())
}

fn check(args: CheckArgs) -> CliResult<()> {
    let (topo, matrix) = load(&args.inputs)?;
    println!(
        "topology: {} nodes ({} DC, {} access), {} circuits, {} SRLGs",
        topo.node_count(),
        topo.dc_sites().len(),
        topo.access_sites().len(),
        topo.circuit_count(),
        topo.srlgs().len()
    );
    if args.inputs.demands.is_some() {
        println!(
            "demands: {} totalling {} Mbps",
            matrix.len(),
            matrix.total_mbps()
        );
    }
    if let Some(p) = &args.request {
        let req = request(&topo, p)?;
        println!(
            "request {}: {} a-ends, {} candidates",
            req.id,
            req.a_ends.len(),
            req.candidates.len()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Study(a) => study(a),
        Command::Report(a) => report(a),
        Command::Place(a) => place(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}
