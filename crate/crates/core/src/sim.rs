//! Placement-policy comparison study.
//!
//! Each iteration starts from an empty (or seeded) network and keeps
//! generating random workloads until one arrives that no candidate site can
//! take without some used path exceeding the utilisation cap. All algorithms
//! in an iteration see the same workload sequence.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::WcpuReading;
use crate::controller::{
    Algorithm, BaselineRetry, ControllerError, ControllerState, Leg, PlacementRequest,
};
use crate::model::{FailureSetSpec, NodeId, Topology, TrafficMatrix};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid study config: {0}")]
    Config(String),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How many access sites a workload spans.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetDistribution {
    /// Size uniform on `1..=n`, then a uniform subset of that size.
    #[default]
    UniformSize,
    FixedSize(usize),
    AllSites,
}

impl std::str::FromStr for SubsetDistribution {
    type Err = String;

    /// `uniform`, `all`, or `fixed:K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SubsetDistribution::UniformSize),
            "all" => Ok(SubsetDistribution::AllSites),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k > 0)
                .map(SubsetDistribution::FixedSize)
                .ok_or_else(|| {
                    format!("unknown subset distribution `{s}` (expected uniform, all or fixed:K)")
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub seed: u64,
    pub iterations: usize,
    pub algorithms: Vec<Algorithm>,
    pub bw_min_mbps: f64,
    pub bw_max_mbps: f64,
    pub util_cap: f64,
    pub failure_spec: FailureSetSpec,
    pub subset: SubsetDistribution,
    pub baseline_retry: BaselineRetry,
    pub wcpu_reading: WcpuReading,
    /// Hard stop per iteration in case saturation is never reached.
    pub max_workloads: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            seed: 1,
            iterations: 100,
            algorithms: vec![
                Algorithm::DemandEngineering,
                Algorithm::Random,
                Algorithm::LowestLatency,
            ],
            bw_min_mbps: 50.0,
            bw_max_mbps: 500.0,
            util_cap: 1.0,
            failure_spec: FailureSetSpec::none_only(),
            subset: SubsetDistribution::UniformSize,
            baseline_retry: BaselineRetry::PickOnly,
            wcpu_reading: WcpuReading::Union,
            max_workloads: 100_000,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: &str| Err(SimError::Config(m.to_string()));
        if self.iterations == 0 {
            return fail("iterations must be >= 1");
        }
        if self.algorithms.is_empty() {
            return fail("at least one algorithm is required");
        }
        if !(self.bw_min_mbps >= 0.0 && self.bw_min_mbps <= self.bw_max_mbps)
            || !self.bw_max_mbps.is_finite()
        {
            return fail("need 0 <= bw_min_mbps <= bw_max_mbps");
        }
        if !(self.util_cap > 0.0 && self.util_cap <= 1.0) {
            return fail("util_cap must be in (0, 1]");
        }
        if self.max_workloads == 0 {
            return fail("max_workloads must be >= 1");
        }
        if let SubsetDistribution::FixedSize(0) = self.subset {
            return fail("fixed subset size must be >= 1");
        }
        Ok(())
    }
}

/// Uniformly sized bidirectional demands between `a_ends` and one DC.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub a_ends: Vec<NodeId>,
    pub bandwidth_mbps: f64,
}

impl Workload {
    /// Total of every directed leg, local legs included.
    pub fn aggregate_mbps(&self) -> f64 {
        self.a_ends.len() as f64 * 2.0 * self.bandwidth_mbps
    }

    pub fn request(
        &self,
        id: String,
        candidates: &[NodeId],
        cfg: &StudyConfig,
    ) -> PlacementRequest {
        PlacementRequest {
            id,
            a_ends: self.a_ends.clone(),
            candidates: candidates.to_vec(),
            legs: vec![Leg::symmetric(self.bandwidth_mbps); self.a_ends.len()],
            l_max_ms: f64::INFINITY,
            util_threshold: cfg.util_cap,
            failure_spec: cfg.failure_spec,
        }
    }
}

pub fn generate_workload<R: Rng + ?Sized>(
    rng: &mut R,
    access_sites: &[NodeId],
    cfg: &StudyConfig,
) -> Workload {
    assert!(!access_sites.is_empty(), "no access sites");
    let n = access_sites.len();
    let size = match cfg.subset {
        SubsetDistribution::UniformSize => rng.random_range(1..=n),
        SubsetDistribution::FixedSize(k) => k.clamp(1, n),
        SubsetDistribution::AllSites => n,
    };
    let mut a_ends: Vec<NodeId> = index::sample(rng, n, size)
        .into_iter()
        .map(|i| access_sites[i])
        .collect();
    a_ends.sort();
    let bandwidth_mbps = if cfg.bw_min_mbps == cfg.bw_max_mbps {
        cfg.bw_min_mbps
    } else {
        rng.random_range(cfg.bw_min_mbps..=cfg.bw_max_mbps)
    };
    Workload {
        a_ends,
        bandwidth_mbps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Committed,
    /// The algorithm's pick did not fit but another site could have.
    Dropped,
    /// No site could take the workload; the iteration ends here.
    Saturated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub index: usize,
    pub workload: Workload,
    pub chosen: Option<NodeId>,
    pub outcome: Outcome,
    /// Worst-case path utilisation of the chosen (or best rejected) site.
    pub max_path_util: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub workloads_placed: usize,
    pub aggregate_mbps: f64,
    pub trace: Vec<TraceRecord>,
    /// False when the workload budget ran out before saturation.
    pub saturated: bool,
}

impl RunResult {
    pub fn final_rejected(&self) -> Option<&TraceRecord> {
        self.trace
            .last()
            .filter(|r| r.outcome == Outcome::Saturated)
    }

    pub fn trace_csv(&self, topo: &Topology) -> String {
        let mut out = String::from("placement_index,workload_size,chosen_site,max_path_util\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.index,
                r.workload.a_ends.len(),
                r.chosen.map(|c| topo.node_name(c)).unwrap_or(""),
                r.max_path_util
            );
        }
        out
    }
}

fn min_util(evals: &[crate::controller::CandidateEvaluation]) -> f64 {
    evals
        .iter()
        .map(|e| e.wc_path_util)
        .fold(f64::INFINITY, f64::min)
}

/// Runs one algorithm to saturation. Workloads come from `workload_seed`;
/// random picks use a separate stream of the same seed.
pub fn run_iteration(
    topo: &Arc<Topology>,
    initial: &TrafficMatrix,
    algorithm: Algorithm,
    cfg: &StudyConfig,
    workload_seed: u64,
) -> Result<RunResult, SimError> {
    cfg.validate()?;
    let access = topo.access_sites();
    let candidates = topo.dc_sites();
    if access.is_empty() || candidates.is_empty() {
        return Err(SimError::Config(
            "topology needs at least one access site and one DC site".into(),
        ));
    }
    let mut state =
        ControllerState::new(Arc::clone(topo), initial.clone()).with_reading(cfg.wcpu_reading);
    let mut workload_rng = ChaCha8Rng::seed_from_u64(workload_seed);
    let mut pick_rng = ChaCha8Rng::seed_from_u64(workload_seed);
    pick_rng.set_stream(1);

    let mut result = RunResult {
        algorithm,
        workloads_placed: 0,
        aggregate_mbps: 0.0,
        trace: Vec::new(),
        saturated: false,
    };
    for index in 0..cfg.max_workloads {
        let workload = generate_workload(&mut workload_rng, &access, cfg);
        let request = workload.request(format!("w{index}"), &candidates, cfg);
        let decision = match algorithm {
            Algorithm::DemandEngineering => state.place(&request)?,
            Algorithm::Random => state.place_random(&request, &mut pick_rng, cfg.baseline_retry)?,
            Algorithm::LowestLatency => state.place_lowest_latency(&request, cfg.baseline_retry)?,
        };
        if let Some(site) = decision.chosen {
            let eval = decision
                .evaluation(site)
                .expect("chosen site was evaluated");
            result.workloads_placed += 1;
            result.aggregate_mbps += workload.aggregate_mbps();
            result.trace.push(TraceRecord {
                index,
                max_path_util: eval.wc_path_util,
                workload,
                chosen: Some(site),
                outcome: Outcome::Committed,
            });
            continue;
        }
        let tried = min_util(&decision.evaluations);
        let all = if algorithm == Algorithm::DemandEngineering {
            decision.evaluations
        } else {
            state.evaluate_all(&request)?
        };
        let saturated = all.iter().all(|e| !e.is_feasible());
        let best_tried = if saturated { min_util(&all) } else { tried };
        result.trace.push(TraceRecord {
            index,
            workload,
            chosen: None,
            outcome: if saturated {
                Outcome::Saturated
            } else {
                Outcome::Dropped
            },
            max_path_util: best_tried,
        });
        if saturated {
            result.saturated = true;
            break;
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationResult {
    pub iteration: usize,
    pub seed: u64,
    /// One per configured algorithm, same order.
    pub runs: Vec<RunResult>,
}

impl IterationResult {
    pub fn run(&self, algorithm: Algorithm) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub workloads_placed: usize,
    pub aggregate_mbps: f64,
    /// Percentage of the demand-engineering total; absent without a comparison.
    pub pct_of_de: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub iterations: Vec<IterationResult>,
}

/// Per-iteration workload seeds derived from the study seed.
pub fn iteration_seeds(seed: u64, iterations: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..iterations).map(|_| rng.next_u64()).collect()
}

pub fn run_study(topo: &Arc<Topology>, cfg: &StudyConfig) -> Result<StudyReport, SimError> {
    run_study_from(topo, &TrafficMatrix::new(), cfg)
}

pub fn run_study_from(
    topo: &Arc<Topology>,
    initial: &TrafficMatrix,
    cfg: &StudyConfig,
) -> Result<StudyReport, SimError> {
    cfg.validate()?;
    let seeds = iteration_seeds(cfg.seed, cfg.iterations);
    let iterations = seeds
        .par_iter()
        .enumerate()
        .map(|(iteration, &seed)| {
            let runs = cfg
                .algorithms
                .iter()
                .map(|&a| run_iteration(topo, initial, a, cfg, seed))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(IterationResult {
                iteration,
                seed,
                runs,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let total = |a: Algorithm| -> (usize, f64) {
        iterations
            .iter()
            .filter_map(|it| it.run(a))
            .fold((0, 0.0), |(n, mbps), r| {
                (n + r.workloads_placed, mbps + r.aggregate_mbps)
            })
    };
    let de_total = cfg
        .algorithms
        .contains(&Algorithm::DemandEngineering)
        .then(|| total(Algorithm::DemandEngineering).1);
    let compare = cfg.algorithms.len() > 1;
    let rows = cfg
        .algorithms
        .iter()
        .map(|&a| {
            let (placed, mbps) = total(a);
            StudyRow {
                algorithm: a,
                iterations: cfg.iterations,
                workloads_placed: placed,
                aggregate_mbps: mbps,
                pct_of_de: de_total
                    .filter(|&de| compare && de > 0.0)
                    .map(|de| 100.0 * mbps / de),
            }
        })
        .collect();
    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        iterations,
    })
}

impl StudyReport {
    pub fn row(&self, algorithm: Algorithm) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }

    /// Iterations where `a` placed at least as much aggregate demand as `b`.
    pub fn iterations_at_least(&self, a: Algorithm, b: Algorithm) -> usize {
        self.iterations
            .iter()
            .filter(|it| match (it.run(a), it.run(b)) {
                (Some(x), Some(y)) => x.aggregate_mbps >= y.aggregate_mbps,
                _ => false,
            })
            .count()
    }

    /// Mean over iterations of `a / b - 1`.
    pub fn mean_gain(&self, a: Algorithm, b: Algorithm) -> Option<f64> {
        let gains: Vec<f64> = self
            .iterations
            .iter()
            .filter_map(|it| {
                let (x, y) = (it.run(a)?, it.run(b)?);
                (y.aggregate_mbps > 0.0).then(|| x.aggregate_mbps / y.aggregate_mbps - 1.0)
            })
            .collect();
        (!gains.is_empty()).then(|| gains.iter().sum::<f64>() / gains.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("algorithm,iterations,workloads_placed,aggregate_mbps,pct_of_de\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.algorithm.short_name(),
                r.iterations,
                r.workloads_placed,
                r.aggregate_mbps,
                r.pct_of_de.map(|p| format!("{p:.2}")).unwrap_or_default()
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<10} {:>10} {:>10} {:>18} {:>8}\n",
            "algorithm", "iterations", "placed", "aggregate_mbps", "% of DE"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>10} {:>10} {:>18.0} {:>8}",
                r.algorithm.short_name(),
                r.iterations,
                r.workloads_placed,
                r.aggregate_mbps,
                r.pct_of_de.map(|p| format!("{p:.0}%")).unwrap_or_default()
            );
        }
        out
    }

    /// Writes `study.csv` and, when asked, `traces/iter-K-ALGO.csv`.
    pub fn write(&self, topo: &Topology, dir: &Path, traces: bool) -> Result<(), SimError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SimError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let study = dir.join("study.csv");
        fs::write(&study, self.to_csv()).map_err(io(&study))?;
        if traces {
            let tdir = dir.join("traces");
            fs::create_dir_all(&tdir).map_err(io(&tdir))?;
            for it in &self.iterations {
                for run in &it.runs {
                    let path = tdir.join(format!(
                        "iter-{}-{}.csv",
                        it.iteration,
                        run.algorithm.short_name()
                    ));
                    fs::write(&path, run.trace_csv(topo)).map_err(io(&path))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Circuit, Demand, Node};

    /// Two access sites and two DCs separated by a single 1000 Mbps circuit.
    fn bottleneck() -> Topology {
        Topology::new(
            vec![
                Node::new("s1", false, true),
                Node::new("s2", false, true),
                Node::new("h1", false, false),
                Node::new("h2", false, false),
                Node::new("d1", true, false),
                Node::new("d2", true, false),
            ],
            vec![
                Circuit::new("s1h1", "s1", "h1", 100_000.0, 1.0, 10),
                Circuit::new("s2h1", "s2", "h1", 100_000.0, 1.0, 10),
                Circuit::new("h1h2", "h1", "h2", 1000.0, 1.0, 10),
                Circuit::new("h2d1", "h2", "d1", 100_000.0, 1.0, 10),
                Circuit::new("h2d2", "h2", "d2", 100_000.0, 2.0, 10),
            ],
        )
        .unwrap()
    }

    fn fixed_cfg() -> StudyConfig {
        StudyConfig {
            bw_min_mbps: 100.0,
            bw_max_mbps: 100.0,
            subset: SubsetDistribution::FixedSize(1),
            iterations: 3,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn workload_generation_is_deterministic() {
        let sites: Vec<NodeId> = (0..11).map(NodeId).collect();
        let cfg = StudyConfig::default();
        let gen = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| generate_workload(&mut rng, &sites, &cfg))
                .collect::<Vec<_>>()
        };
        assert_eq!(gen(5), gen(5));
        for w in gen(5) {
            assert!(!w.a_ends.is_empty() && w.a_ends.len() <= 11);
            assert!(w.a_ends.windows(2).all(|p| p[0] < p[1]));
            assert!((50.0..=500.0).contains(&w.bandwidth_mbps));
        }
    }

    #[test]
    fn bandwidth_mean_matches_uniform() {
        // Uniform(50, 500): mean 275, sd 129.9; over 1e5 draws the standard
        // error is 0.41, so a 5 Mbps band is > 12 sigma.
        let sites = [NodeId(0), NodeId(1)];
        let cfg = StudyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| generate_workload(&mut rng, &sites, &cfg).bandwidth_mbps)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 275.0).abs() < 5.0, "{mean}");
    }

    #[test]
    fn subset_sizes_are_uniform() {
        let sites: Vec<NodeId> = (0..4).map(NodeId).collect();
        let cfg = StudyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 5];
        for _ in 0..40_000 {
            counts[generate_workload(&mut rng, &sites, &cfg).a_ends.len()] += 1;
        }
        assert_eq!(counts[0], 0);
        // Binomial(40000, 1/4): sd 86.6.
        for c in &counts[1..] {
            assert!((*c as i64 - 10_000).abs() < 600, "{counts:?}");
        }
    }

    #[test]
    fn single_site_always_selected() {
        let cfg = StudyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(
                generate_workload(&mut rng, &[NodeId(4)], &cfg).a_ends,
                vec![NodeId(4)]
            );
        }
    }

    #[test]
    fn bottleneck_saturates_after_ten() {
        let topo = Arc::new(bottleneck());
        let cfg = fixed_cfg();
        for algo in [
            Algorithm::DemandEngineering,
            Algorithm::Random,
            Algorithm::LowestLatency,
        ] {
            let r = run_iteration(&topo, &TrafficMatrix::new(), algo, &cfg, 42).unwrap();
            assert_eq!(r.workloads_placed, 10, "{algo:?}");
            assert_eq!(r.aggregate_mbps, 2000.0);
            assert!(r.saturated);
            let last = r.final_rejected().unwrap();
            assert!((last.max_path_util - 1.1).abs() < 1e-12);
            assert_eq!(r.trace.len(), 11);
        }
    }

    #[test]
    fn preloaded_network_places_nothing() {
        let topo = Arc::new(bottleneck());
        let mut m = TrafficMatrix::new();
        m.push(Demand::between(&topo, "bg1", "h1", "h2", 1000.0).unwrap())
            .unwrap();
        m.push(Demand::between(&topo, "bg2", "h2", "h1", 1000.0).unwrap())
            .unwrap();
        let r = run_iteration(&topo, &m, Algorithm::DemandEngineering, &fixed_cfg(), 1).unwrap();
        assert_eq!(r.workloads_placed, 0);
        assert_eq!(r.aggregate_mbps, 0.0);
        assert!(r.saturated);
    }

    #[test]
    fn iteration_is_deterministic() {
        let topo = Arc::new(bottleneck());
        let cfg = StudyConfig {
            iterations: 1,
            ..StudyConfig::default()
        };
        for algo in [
            Algorithm::DemandEngineering,
            Algorithm::Random,
            Algorithm::LowestLatency,
        ] {
            let a = run_iteration(&topo, &TrafficMatrix::new(), algo, &cfg, 77).unwrap();
            let b = run_iteration(&topo, &TrafficMatrix::new(), algo, &cfg, 77).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn study_rows_and_percentages() {
        let topo = Arc::new(bottleneck());
        let report = run_study(&topo, &fixed_cfg()).unwrap();
        let de = report.row(Algorithm::DemandEngineering).unwrap();
        assert_eq!(de.pct_of_de, Some(100.0));
        assert_eq!(de.workloads_placed, 30);
        let csv = report.to_csv();
        assert!(csv.starts_with(
            "algorithm,iterations,workloads_placed,aggregate_mbps,pct_of_de\nde,3,30,6000,100.00\n"
        ));
        assert_eq!(report, run_study(&topo, &fixed_cfg()).unwrap());

        let single = StudyConfig {
            algorithms: vec![Algorithm::Random],
            ..fixed_cfg()
        };
        let report = run_study(&topo, &single).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].pct_of_de, None);
        assert!(report.to_csv().ends_with("random,3,30,6000,\n"));
    }

    #[test]
    fn subset_distribution_parses() {
        assert_eq!("uniform".parse(), Ok(SubsetDistribution::UniformSize));
        assert_eq!("all".parse(), Ok(SubsetDistribution::AllSites));
        assert_eq!("fixed:3".parse(), Ok(SubsetDistribution::FixedSize(3)));
        assert!("fixed:0".parse::<SubsetDistribution>().is_err());
        assert!("some".parse::<SubsetDistribution>().is_err());
    }

    #[test]
    fn config_validation() {
        let bad = [
            StudyConfig {
                iterations: 0,
                ..StudyConfig::default()
            },
            StudyConfig {
                bw_min_mbps: 600.0,
                ..StudyConfig::default()
            },
            StudyConfig {
                util_cap: 0.0,
                ..StudyConfig::default()
            },
            StudyConfig {
                algorithms: vec![],
                ..StudyConfig::default()
            },
            StudyConfig {
                subset: SubsetDistribution::FixedSize(0),
                ..StudyConfig::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn writes_outputs() {
        let topo = Arc::new(bottleneck());
        let report = run_study(&topo, &fixed_cfg()).unwrap();
        let dir = std::env::temp_dir().join(format!("de-sim-test-{}", std::process::id()));
        report.write(&topo, &dir, true).unwrap();
        assert!(dir.join("study.csv").exists());
        let trace = fs::read_to_string(dir.join("traces/iter-0-de.csv")).unwrap();
        assert!(trace
            .starts_with("placement_index,workload_size,chosen_site,max_path_util\n0,1,d1,0.1\n"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
