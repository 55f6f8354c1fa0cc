//! Placement controller.
//!
//! For every candidate site the controller builds the workload's demand legs,
//! simulates them on top of the committed matrix across the requested failure
//! scenarios, and applies admission control:
//!
//! 1. any leg disconnected in some scenario -> `reject_unroutable`
//! 2. worst-case path utilisation above the threshold -> `reject_capacity`
//! 3. worst-case path latency above the bound -> `reject_latency`
//!
//! Among feasible sites the one with the lowest worst-case path utilisation
//! wins; ties go to lower latency, then to the smaller node id. Accepted
//! demands are committed immediately and can be rolled back in LIFO order.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AnalysisError, LoadModel, PathImpact, WcpuReading};
use crate::model::{
    enumerate_scenarios, Demand, FailureScenario, FailureSetSpec, NodeId, Topology, TrafficMatrix,
};
use crate::routing::{ScenarioRouter, UnitRoute};

/// Utilisations closer than this are treated as equal when choosing a site.
pub const WCPU_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("{field}: unknown node `{name}`")]
    UnknownNode { field: String, name: String },
    #[error("{field}: {message}")]
    InvalidRequest { field: String, message: String },
    #[error("request `{0}` already has a committed placement")]
    DuplicateRequest(String),
    #[error("no decision with id `{0}`")]
    UnknownDecision(String),
    #[error("decision `{0}` is not a live committed placement")]
    NotCommitted(String),
    #[error("decision `{0}` is not the most recent commit")]
    NotMostRecent(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ControllerError {
    ControllerError::InvalidRequest {
        field: field.into(),
        message: message.into(),
    }
}

/// Bandwidth for one A-end, in each direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leg {
    pub a_to_b_mbps: f64,
    pub b_to_a_mbps: f64,
}

impl Leg {
    pub fn symmetric(mbps: f64) -> Self {
        Leg {
            a_to_b_mbps: mbps,
            b_to_a_mbps: mbps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRequest {
    pub id: String,
    pub a_ends: Vec<NodeId>,
    pub candidates: Vec<NodeId>,
    /// One entry per A-end, same order.
    pub legs: Vec<Leg>,
    pub l_max_ms: f64,
    pub util_threshold: f64,
    pub failure_spec: FailureSetSpec,
}

impl PlacementRequest {
    pub fn validate(&self, topo: &Topology) -> Result<(), ControllerError> {
        if self.id.is_empty() {
            return Err(invalid("request_id", "must not be empty"));
        }
        if self.a_ends.is_empty() {
            return Err(invalid("a_ends", "must not be empty"));
        }
        if self.candidates.is_empty() {
            return Err(invalid("candidates", "must not be empty"));
        }
        if self.legs.len() != self.a_ends.len() {
            return Err(invalid(
                "legs",
                format!(
                    "expected {} entries (one per A-end), found {}",
                    self.a_ends.len(),
                    self.legs.len()
                ),
            ));
        }
        for (field, ids) in [("a_ends", &self.a_ends), ("candidates", &self.candidates)] {
            let mut seen = HashSet::new();
            for (i, n) in ids.iter().enumerate() {
                if n.0 >= topo.node_count() {
                    return Err(ControllerError::UnknownNode {
                        field: format!("{field}[{i}]"),
                        name: n.to_string(),
                    });
                }
                if !seen.insert(n) {
                    return Err(invalid(format!("{field}[{i}]"), "duplicate node"));
                }
            }
        }
        for (i, leg) in self.legs.iter().enumerate() {
            for (name, v) in [
                ("a_to_b_mbps", leg.a_to_b_mbps),
                ("b_to_a_mbps", leg.b_to_a_mbps),
            ] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(invalid(
                        format!("legs[{i}].{name}"),
                        format!("bandwidth must be finite and >= 0, got {v}"),
                    ));
                }
            }
        }
        if !(self.l_max_ms > 0.0) {
            return Err(invalid("l_max_ms", "must be > 0"));
        }
        if !(self.util_threshold > 0.0 && self.util_threshold <= 1.0) {
            return Err(invalid("util_threshold", "must be in (0, 1]"));
        }
        if !self.failure_spec.include_none {
            return Err(invalid(
                "failure_sets",
                "the no-failure scenario is always evaluated",
            ));
        }
        Ok(())
    }

    /// Demand legs toward `candidate`. Legs whose A-end is the candidate itself
    /// stay inside the site and place no load on the network.
    pub fn demands_for(&self, topo: &Topology, candidate: NodeId) -> Vec<Demand> {
        let b = topo.node_name(candidate);
        let mut out = Vec::with_capacity(self.a_ends.len() * 2);
        for (&a_end, leg) in self.a_ends.iter().zip(&self.legs) {
            if a_end == candidate {
                continue;
            }
            let a = topo.node_name(a_end);
            out.push(Demand {
                id: format!("{}/{a}->{b}", self.id),
                src: a_end,
                dst: candidate,
                bandwidth_mbps: leg.a_to_b_mbps,
            });
            out.push(Demand {
                id: format!("{}/{b}->{a}", self.id),
                src: candidate,
                dst: a_end,
                bandwidth_mbps: leg.b_to_a_mbps,
            });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    RejectCapacity,
    RejectLatency,
    RejectUnroutable,
}

/// Capacity admission failure, stated on utilisation.
pub fn exceeds_threshold(wc_path_util: f64, threshold: f64) -> bool {
    wc_path_util > threshold
}

/// Capacity admission failure, stated on the remaining margin `R`.
pub fn margin_insufficient(remaining: f64, threshold: f64) -> bool {
    remaining < 1.0 - threshold
}

/// Admission checks in order: routability, capacity, latency. Equality passes.
pub fn admission_verdict(impact: &PathImpact, threshold: f64, l_max_ms: f64) -> Verdict {
    if impact.any_unrouted {
        Verdict::RejectUnroutable
    } else if exceeds_threshold(impact.wc_path_util, threshold) {
        Verdict::RejectCapacity
    } else if impact.wc_path_latency_ms > l_max_ms {
        Verdict::RejectLatency
    } else {
        Verdict::Feasible
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvaluation {
    pub candidate: NodeId,
    pub wc_path_util: f64,
    pub remaining_r: f64,
    pub wc_path_latency_ms: f64,
    pub verdict: Verdict,
}

impl CandidateEvaluation {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    DemandEngineering,
    Random,
    LowestLatency,
}

impl Algorithm {
    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::DemandEngineering => "de",
            Algorithm::Random => "random",
            Algorithm::LowestLatency => "latency",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "de" | "demand_engineering" => Ok(Algorithm::DemandEngineering),
            "random" => Ok(Algorithm::Random),
            "latency" | "lowest_latency" => Ok(Algorithm::LowestLatency),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementDecision {
    pub request_id: String,
    pub algorithm: Algorithm,
    /// Evaluated candidates in request order. Baselines only list the sites they tried.
    pub evaluations: Vec<CandidateEvaluation>,
    pub chosen: Option<NodeId>,
    pub committed: bool,
}

impl PlacementDecision {
    pub fn evaluation(&self, candidate: NodeId) -> Option<&CandidateEvaluation> {
        self.evaluations.iter().find(|e| e.candidate == candidate)
    }
}

/// Whether a baseline that picked an infeasible site may try the others.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineRetry {
    #[default]
    PickOnly,
    AllCandidates,
}

impl std::str::FromStr for BaselineRetry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pick" | "pick_only" => Ok(BaselineRetry::PickOnly),
            "all" | "all_candidates" => Ok(BaselineRetry::AllCandidates),
            other => Err(format!(
                "unknown retry mode `{other}` (expected pick or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub decision: PlacementDecision,
    pub demands_added: usize,
    pub rolled_back: bool,
}

impl LogEntry {
    fn is_live_commit(&self) -> bool {
        self.decision.committed && !self.rolled_back
    }
}

/// Topology, committed matrix and decision log.
///
/// Mutation goes through `&mut self`, so callers sharing a state across
/// threads serialise placements behind a lock; every evaluation within one
/// placement sees the same committed snapshot.
#[derive(Debug, Clone)]
pub struct ControllerState {
    topology: Arc<Topology>,
    committed: TrafficMatrix,
    log: Vec<LogEntry>,
    reading: WcpuReading,
    models: HashMap<FailureSetSpec, LoadModel>,
    steady: ScenarioRouter,
}

impl ControllerState {
    pub fn new(topology: Arc<Topology>, initial: TrafficMatrix) -> Self {
        let steady = ScenarioRouter::new(&topology, &FailureScenario::none())
            .expect("no-failure scenario is valid for any topology");
        ControllerState {
            topology,
            committed: initial,
            log: Vec::new(),
            reading: WcpuReading::default(),
            models: HashMap::new(),
            steady,
        }
    }

    pub fn with_reading(mut self, reading: WcpuReading) -> Self {
        self.reading = reading;
        self.models.clear();
        self
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn committed_matrix(&self) -> &TrafficMatrix {
        &self.committed
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn reading(&self) -> WcpuReading {
        self.reading
    }

    fn model(&mut self, spec: FailureSetSpec) -> Result<&mut LoadModel, AnalysisError> {
        if !self.models.contains_key(&spec) {
            let scenarios = enumerate_scenarios(&self.topology, &spec);
            let model = LoadModel::with_matrix(&self.topology, &scenarios, &self.committed)?;
            self.models.insert(spec, model);
        }
        Ok(self.models.get_mut(&spec).expect("inserted above"))
    }

    /// Network worst-case utilisation of the committed matrix.
    pub fn network_wc_util(&mut self, spec: FailureSetSpec) -> Result<f64, AnalysisError> {
        let topo = Arc::clone(&self.topology);
        Ok(self.model(spec)?.network_wc_util(&topo))
    }

    pub fn impact(
        &mut self,
        request: &PlacementRequest,
        candidate: NodeId,
    ) -> Result<PathImpact, ControllerError> {
        let topo = Arc::clone(&self.topology);
        let demands = request.demands_for(&topo, candidate);
        let reading = self.reading;
        Ok(self
            .model(request.failure_spec)?
            .impact(&topo, &demands, reading))
    }

    fn evaluate_with(
        &mut self,
        request: &PlacementRequest,
        candidate: NodeId,
        l_max_ms: f64,
    ) -> Result<CandidateEvaluation, ControllerError> {
        let impact = self.impact(request, candidate)?;
        Ok(CandidateEvaluation {
            candidate,
            wc_path_util: impact.wc_path_util,
            remaining_r: impact.remaining(),
            wc_path_latency_ms: impact.wc_path_latency_ms,
            verdict: admission_verdict(&impact, request.util_threshold, l_max_ms),
        })
    }

    pub fn evaluate_candidate(
        &mut self,
        request: &PlacementRequest,
        candidate: NodeId,
    ) -> Result<CandidateEvaluation, ControllerError> {
        if !request.candidates.contains(&candidate) {
            return Err(invalid(
                "candidates",
                format!(
                    "`{}` is not a candidate",
                    self.topology.node_name(candidate)
                ),
            ));
        }
        self.evaluate_with(request, candidate, request.l_max_ms)
    }

    /// Evaluates every candidate with full admission control, without committing.
    pub fn evaluate_all(
        &mut self,
        request: &PlacementRequest,
    ) -> Result<Vec<CandidateEvaluation>, ControllerError> {
        request.validate(&self.topology)?;
        request
            .candidates
            .iter()
            .map(|&c| self.evaluate_with(request, c, request.l_max_ms))
            .collect()
    }

    fn check_not_live(&self, request: &PlacementRequest) -> Result<(), ControllerError> {
        if self
            .log
            .iter()
            .any(|e| e.decision.request_id == request.id && e.is_live_commit())
        {
            return Err(ControllerError::DuplicateRequest(request.id.clone()));
        }
        Ok(())
    }

    /// Chooses the feasible candidate with minimal worst-case path utilisation.
    pub fn place(
        &mut self,
        request: &PlacementRequest,
    ) -> Result<PlacementDecision, ControllerError> {
        request.validate(&self.topology)?;
        self.check_not_live(request)?;
        let evaluations = self.evaluate_all(request)?;
        let chosen = best_feasible(&evaluations).map(|e| e.candidate);
        self.finish(request, Algorithm::DemandEngineering, evaluations, chosen)
    }

    /// Picks a candidate uniformly at random and commits it if it fits under
    /// the utilisation threshold. Latency is not checked.
    pub fn place_random<R: Rng + ?Sized>(
        &mut self,
        request: &PlacementRequest,
        rng: &mut R,
        retry: BaselineRetry,
    ) -> Result<PlacementDecision, ControllerError> {
        request.validate(&self.topology)?;
        self.check_not_live(request)?;
        let mut order = request.candidates.clone();
        match retry {
            BaselineRetry::PickOnly => {
                let pick = order[rng.random_range(0..order.len())];
                order = vec![pick];
            }
            BaselineRetry::AllCandidates => order.shuffle(rng),
        }
        self.place_in_order(request, Algorithm::Random, &order)
    }

    /// Picks the candidate with the lowest average no-failure path latency over
    /// the workload's legs, then verifies the utilisation threshold.
    pub fn place_lowest_latency(
        &mut self,
        request: &PlacementRequest,
        retry: BaselineRetry,
    ) -> Result<PlacementDecision, ControllerError> {
        request.validate(&self.topology)?;
        self.check_not_live(request)?;
        let mut ranked: Vec<(f64, NodeId)> = request
            .candidates
            .iter()
            .map(|&c| (self.average_latency(request, c), c))
            .collect();
        ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut order: Vec<NodeId> = ranked.into_iter().map(|(_, c)| c).collect();
        if retry == BaselineRetry::PickOnly {
            order.truncate(1);
        }
        self.place_in_order(request, Algorithm::LowestLatency, &order)
    }

    /// Mean over both directions of every leg of the no-failure path latency
    /// (worst ECMP path per leg). Legs local to the candidate count as zero.
    pub fn average_latency(&mut self, request: &PlacementRequest, candidate: NodeId) -> f64 {
        let topo = Arc::clone(&self.topology);
        let mut total = 0.0;
        let mut count = 0usize;
        for &a in &request.a_ends {
            for (s, d) in [(a, candidate), (candidate, a)] {
                count += 1;
                if s == d {
                    continue;
                }
                match self.steady.route(&topo, s, d) {
                    UnitRoute::Routed { latency, .. } => total += latency.max_ms,
                    _ => return f64::INFINITY,
                }
            }
        }
        total / count as f64
    }

    fn place_in_order(
        &mut self,
        request: &PlacementRequest,
        algorithm: Algorithm,
        order: &[NodeId],
    ) -> Result<PlacementDecision, ControllerError> {
        let mut evaluations = Vec::with_capacity(order.len());
        let mut chosen = None;
        for &c in order {
            let eval = self.evaluate_with(request, c, f64::INFINITY)?;
            let ok = eval.is_feasible();
            evaluations.push(eval);
            if ok {
                chosen = Some(c);
                break;
            }
        }
        evaluations.sort_by_key(|e| {
            request
                .candidates
                .iter()
                .position(|&c| c == e.candidate)
                .unwrap_or(usize::MAX)
        });
        self.finish(request, algorithm, evaluations, chosen)
    }

    fn finish(
        &mut self,
        request: &PlacementRequest,
        algorithm: Algorithm,
        evaluations: Vec<CandidateEvaluation>,
        chosen: Option<NodeId>,
    ) -> Result<PlacementDecision, ControllerError> {
        let mut demands_added = 0;
        if let Some(site) = chosen {
            let demands = request.demands_for(&self.topology, site);
            if let Some(d) = demands.iter().find(|d| self.committed.contains_id(&d.id)) {
                return Err(invalid(
                    "request_id",
                    format!("demand id `{}` already committed", d.id),
                ));
            }
            let topo = Arc::clone(&self.topology);
            for model in self.models.values_mut() {
                model.add_demands(&topo, &demands);
            }
            demands_added = demands.len();
            for d in demands {
                self.committed.push(d).expect("ids checked above");
            }
        }
        let decision = PlacementDecision {
            request_id: request.id.clone(),
            algorithm,
            evaluations,
            chosen,
            committed: chosen.is_some(),
        };
        self.log.push(LogEntry {
            decision: decision.clone(),
            demands_added,
            rolled_back: false,
        });
        Ok(decision)
    }

    /// Fails exactly when [`rollback`](Self::rollback) would, without mutating.
    pub fn check_rollback(&self, request_id: &str) -> Result<usize, ControllerError> {
        let idx = self
            .log
            .iter()
            .rposition(|e| e.decision.request_id == request_id)
            .ok_or_else(|| ControllerError::UnknownDecision(request_id.to_string()))?;
        if !self.log[idx].is_live_commit() {
            return Err(ControllerError::NotCommitted(request_id.to_string()));
        }
        let latest = self
            .log
            .iter()
            .rposition(LogEntry::is_live_commit)
            .expect("idx is a live commit");
        if latest != idx {
            return Err(ControllerError::NotMostRecent(request_id.to_string()));
        }
        Ok(idx)
    }

    /// Undoes the most recent live commit. Only LIFO order is supported.
    pub fn rollback(&mut self, request_id: &str) -> Result<(), ControllerError> {
        let idx = self.check_rollback(request_id)?;
        let entry = &mut self.log[idx];
        entry.rolled_back = true;
        self.committed.truncate_tail(entry.demands_added);
        self.models.clear();
        Ok(())
    }
}

/// Feasible evaluation with the lowest utilisation; ties (within
/// [`WCPU_TIE_TOLERANCE`]) go to lower latency, then the smaller node id.
pub fn best_feasible(evaluations: &[CandidateEvaluation]) -> Option<&CandidateEvaluation> {
    let min = evaluations
        .iter()
        .filter(|e| e.is_feasible())
        .map(|e| e.wc_path_util)
        .min_by(f64::total_cmp)?;
    evaluations
        .iter()
        .filter(|e| e.is_feasible() && e.wc_path_util <= min + WCPU_TIE_TOLERANCE)
        .min_by(|x, y| {
            x.wc_path_latency_ms
                .total_cmp(&y.wc_path_latency_ms)
                .then(x.candidate.cmp(&y.candidate))
        })
}

/// Name-based request document used by the JSON API and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestDoc {
    pub request_id: String,
    pub a_ends: Vec<String>,
    pub candidates: Vec<String>,
    pub legs: Vec<Leg>,
    pub l_max_ms: f64,
    pub util_threshold: f64,
    #[serde(default = "default_failure_sets")]
    pub failure_sets: Vec<String>,
}

fn default_failure_sets() -> Vec<String> {
    vec!["none".to_string()]
}

impl RequestDoc {
    /// Resolves node names; errors carry the JSON field path.
    pub fn resolve(&self, topo: &Topology) -> Result<PlacementRequest, ControllerError> {
        let lookup = |field: &str, names: &[String]| {
            names
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    topo.node_id(n).ok_or_else(|| ControllerError::UnknownNode {
                        field: format!("{field}[{i}]"),
                        name: n.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let mut failure_spec = FailureSetSpec::none_only();
        for (i, class) in self.failure_sets.iter().enumerate() {
            let one = FailureSetSpec::parse_list(class)
                .map_err(|m| invalid(format!("failure_sets[{i}]"), m))?;
            failure_spec.include_circuits |= one.include_circuits;
            failure_spec.include_nodes |= one.include_nodes;
            failure_spec.include_srlgs |= one.include_srlgs;
        }
        let request = PlacementRequest {
            id: self.request_id.clone(),
            a_ends: lookup("a_ends", &self.a_ends)?,
            candidates: lookup("candidates", &self.candidates)?,
            legs: self.legs.clone(),
            l_max_ms: self.l_max_ms,
            util_threshold: self.util_threshold,
            failure_spec,
        };
        request.validate(topo)?;
        Ok(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDoc {
    pub candidate: String,
    pub verdict: Verdict,
    pub wc_path_util: f64,
    pub remaining_r: f64,
    pub wc_path_latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionDoc {
    pub request_id: String,
    pub chosen: Option<String>,
    pub committed: bool,
    pub evaluations: Vec<EvaluationDoc>,
}

impl DecisionDoc {
    pub fn new(topo: &Topology, d: &PlacementDecision) -> Self {
        DecisionDoc {
            request_id: d.request_id.clone(),
            chosen: d.chosen.map(|n| topo.node_name(n).to_string()),
            committed: d.committed,
            evaluations: d
                .evaluations
                .iter()
                .map(|e| EvaluationDoc {
                    candidate: topo.node_name(e.candidate).to_string(),
                    verdict: e.verdict,
                    wc_path_util: e.wc_path_util,
                    remaining_r: e.remaining_r,
                    wc_path_latency_ms: e.wc_path_latency_ms,
                })
                .collect(),
        }
    }
}
