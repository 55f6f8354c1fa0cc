//! Independent replay of study runs.
//!
//! Loads are rebuilt with the uncached per-demand router, one scenario at a
//! time, and the union path utilisation is recomputed for every committed
//! workload and for the workload that ended each run.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use de_core::controller::PlacementRequest;
use de_core::model::{
    enumerate_scenarios, Demand, EdgeId, FailureScenario, NodeId, Topology, TrafficMatrix,
};
use de_core::routing::{apply_failure, route_demand};
use de_core::sim::{Outcome, RunResult, StudyConfig};

/// Recorded and recomputed figures may differ by at most this much.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

type UnitFlow = Option<Vec<(EdgeId, f64)>>;

struct ScenarioLoads {
    scenario: FailureScenario,
    loads: Vec<f64>,
    /// Unit flows from `route_demand(.., 1.0)`. Scaling a unit flow by the
    /// bandwidth is exactly what routing does, so caching loses nothing.
    unit: HashMap<(NodeId, NodeId), UnitFlow>,
}

impl ScenarioLoads {
    fn unit_flow(&mut self, topo: &Topology, src: NodeId, dst: NodeId) -> Option<&[(EdgeId, f64)]> {
        let scenario = &self.scenario;
        self.unit
            .entry((src, dst))
            .or_insert_with(|| {
                let res = apply_failure(topo, scenario).expect("scenario matches topology");
                let unit = Demand::new("unit", src, dst, 1.0).expect("positive bandwidth");
                let r = route_demand(&res, &unit);
                r.is_routed().then(|| r.flow.load.into_iter().collect())
            })
            .as_deref()
    }

    fn add(
        &mut self,
        topo: &Topology,
        demands: &[Demand],
        loads: &mut [f64],
        used: &mut BTreeSet<EdgeId>,
    ) {
        for d in demands {
            if let Some(flow) = self.unit_flow(topo, d.src, d.dst) {
                for &(e, f) in flow {
                    let mbps = f * d.bandwidth_mbps;
                    loads[e.0] += mbps;
                    if mbps > 0.0 {
                        used.insert(e);
                    }
                }
            }
        }
    }
}

struct Replay<'t> {
    topo: &'t Topology,
    scenarios: Vec<ScenarioLoads>,
}

impl<'t> Replay<'t> {
    fn new(topo: &'t Topology, initial: &TrafficMatrix, cfg: &StudyConfig) -> Self {
        let mut replay = Replay {
            topo,
            scenarios: enumerate_scenarios(topo, &cfg.failure_spec)
                .into_iter()
                .map(|scenario| ScenarioLoads {
                    scenario,
                    loads: vec![0.0; topo.edge_count()],
                    unit: HashMap::new(),
                })
                .collect(),
        };
        replay.commit(initial.demands());
        replay
    }

    /// Union-reading path utilisation of `demands` on top of the current loads.
    fn wc_path_util(&mut self, demands: &[Demand]) -> f64 {
        let topo = self.topo;
        let mut used = BTreeSet::new();
        let mut combined = Vec::with_capacity(self.scenarios.len());
        for s in &mut self.scenarios {
            let mut loads = s.loads.clone();
            s.add(topo, demands, &mut loads, &mut used);
            combined.push(loads);
        }
        used.iter()
            .map(|&e| {
                let cap = topo.edge_capacity(e);
                combined.iter().map(|l| l[e.0] / cap).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    fn commit(&mut self, demands: &[Demand]) {
        let topo = self.topo;
        let mut used = BTreeSet::new();
        for s in &mut self.scenarios {
            let mut loads = std::mem::take(&mut s.loads);
            s.add(topo, demands, &mut loads, &mut used);
            s.loads = loads;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub commits_checked: usize,
    pub finals_checked: usize,
    pub unsaturated_runs: usize,
    /// Largest |recorded - recomputed| seen on a committed workload.
    pub max_disagreement: f64,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn merge(&mut self, other: AuditReport) {
        self.commits_checked += other.commits_checked;
        self.finals_checked += other.finals_checked;
        self.unsaturated_runs += other.unsaturated_runs;
        self.max_disagreement = self.max_disagreement.max(other.max_disagreement);
        self.violations.extend(other.violations);
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.unsaturated_runs == 0
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} commits, {} final rejections, {} unsaturated runs, max disagreement {:.1e}, {} violations",
            self.commits_checked,
            self.finals_checked,
            self.unsaturated_runs,
            self.max_disagreement,
            self.violations.len()
        )
    }
}

/// Replays `run` from `initial`. Every committed workload must sit at or under
/// `util_cap` when it was admitted and match the recorded utilisation; the
/// final rejected workload must exceed `util_cap` at every candidate.
pub fn audit_run(
    topo: &Topology,
    initial: &TrafficMatrix,
    cfg: &StudyConfig,
    run: &RunResult,
) -> AuditReport {
    let mut report = AuditReport::default();
    let candidates = topo.dc_sites();
    let mut replay = Replay::new(topo, initial, cfg);
    let tag = |index: usize| format!("{}#{index}", run.algorithm.short_name());

    for rec in &run.trace {
        let request: PlacementRequest =
            rec.workload
                .request(format!("w{}", rec.index), &candidates, cfg);
        match rec.outcome {
            Outcome::Committed => {
                let site = rec.chosen.expect("committed records name a site");
                let demands = request.demands_for(topo, site);
                let util = replay.wc_path_util(&demands);
                report.commits_checked += 1;
                let diff = (util - rec.max_path_util).abs();
                report.max_disagreement = report.max_disagreement.max(diff);
                if util > cfg.util_cap {
                    report.violations.push(format!(
                        "{}: committed at {util} over cap {}",
                        tag(rec.index),
                        cfg.util_cap
                    ));
                }
                if diff > AGREEMENT_TOLERANCE {
                    report.violations.push(format!(
                        "{}: recorded {} but replay gives {util}",
                        tag(rec.index),
                        rec.max_path_util
                    ));
                }
                replay.commit(&demands);
            }
            Outcome::Dropped => {}
            Outcome::Saturated => {
                report.finals_checked += 1;
                for &c in &candidates {
                    let util = replay.wc_path_util(&request.demands_for(topo, c));
                    if util <= cfg.util_cap {
                        report.violations.push(format!(
                            "{}: final workload fits at {} ({util})",
                            tag(rec.index),
                            topo.node_name(c)
                        ));
                    }
                }
            }
        }
    }
    if !run.saturated || run.final_rejected().is_none() {
        report.unsaturated_runs += 1;
    }
    report
}
