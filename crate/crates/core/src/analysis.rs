//! Worst-case utilisation across failure scenarios.
//!
//! Per scenario, every demand is rerouted from scratch and its flow added to
//! the directed-edge loads in matrix order. A link's worst-case utilisation is
//! its highest load/capacity ratio across the scenario set; the path figure
//! restricts that to the edges carrying the new demands.

use std::collections::BTreeSet;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Demand, EdgeId, FailureScenario, Topology, TrafficMatrix};
use crate::routing::{RoutingError, ScenarioRouter, UnitRoute};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("scenario set is empty")]
    EmptyScenarioSet,
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

/// How worst-case path utilisation is composed from per-scenario loads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WcpuReading {
    /// Max, over every edge the new demands use in any scenario, of that
    /// edge's worst case across all scenarios.
    #[default]
    #[serde(alias = "a")]
    Union,
    /// Max over scenarios of the utilisation of edges used in that same scenario.
    #[serde(alias = "b")]
    PerScenario,
}

impl FromStr for WcpuReading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" | "union" => Ok(WcpuReading::Union),
            "b" | "per_scenario" | "perscenario" => Ok(WcpuReading::PerScenario),
            other => Err(format!("unknown WCPU reading `{other}` (expected a or b)")),
        }
    }
}

/// Adds every routable demand's flow to `loads`. Returns the ids of demands
/// that are disconnected while both endpoints are alive.
fn accumulate<'d>(
    topo: &Topology,
    router: &mut ScenarioRouter,
    demands: impl IntoIterator<Item = &'d Demand>,
    loads: &mut [f64],
) -> Vec<String> {
    let mut unrouted = Vec::new();
    for d in demands {
        match router.route(topo, d.src, d.dst) {
            UnitRoute::Routed { fractions, .. } => {
                for &(e, f) in fractions.iter() {
                    loads[e.0] += f * d.bandwidth_mbps;
                }
            }
            UnitRoute::Disconnected => unrouted.push(d.id.clone()),
            UnitRoute::EndpointDown => {}
        }
    }
    unrouted
}

/// Directed-edge loads (Mbps, indexed by [`EdgeId`]) for one scenario.
pub fn link_loads(
    topo: &Topology,
    matrix: &TrafficMatrix,
    scenario: &FailureScenario,
) -> Result<Vec<f64>, RoutingError> {
    let mut router = ScenarioRouter::new(topo, scenario)?;
    let mut loads = vec![0.0; topo.edge_count()];
    accumulate(topo, &mut router, matrix.demands(), &mut loads);
    Ok(loads)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnroutedDemand {
    pub scenario: String,
    pub demand: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilizationReport {
    pub scenarios: Vec<FailureScenario>,
    /// `per_scenario_loads[i][e]`, aligned with `scenarios`.
    pub per_scenario_loads: Vec<Vec<f64>>,
    pub wc_link_util: Vec<f64>,
    pub network_wc_util: f64,
    pub unrouted: Vec<UnroutedDemand>,
}

impl UtilizationReport {
    /// Uniform demand growth factor before the worst link reaches `threshold`.
    /// Informational only; `None` when the network carries no traffic.
    pub fn resilient_growth_factor(&self, threshold: f64) -> Option<f64> {
        (self.network_wc_util > 0.0).then(|| threshold / self.network_wc_util)
    }

    /// `scenario,edge,load_mbps,utilization` rows for every alive edge, then
    /// one `worst_case` row per edge and a final `summary` row.
    pub fn to_csv(&self, topo: &Topology) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario", "edge", "load_mbps", "utilization"])
            .expect("in-memory write");
        for (sc, loads) in self.scenarios.iter().zip(&self.per_scenario_loads) {
            let label = sc.label(topo);
            for e in topo.edge_ids() {
                let c = e.circuit();
                if sc.failed_circuits.contains(&c) {
                    continue;
                }
                let (a, b) = topo.circuit_ends(c);
                if sc.failed_nodes.contains(&a) || sc.failed_nodes.contains(&b) {
                    continue;
                }
                let load = loads[e.0];
                w.write_record([
                    label.clone(),
                    topo.edge_label(e),
                    load.to_string(),
                    (load / topo.edge_capacity(e)).to_string(),
                ])
                .expect("in-memory write");
            }
        }
        for e in topo.edge_ids() {
            let worst = self
                .per_scenario_loads
                .iter()
                .map(|l| l[e.0])
                .fold(0.0, f64::max);
            w.write_record([
                "worst_case".to_string(),
                topo.edge_label(e),
                worst.to_string(),
                self.wc_link_util[e.0].to_string(),
            ])
            .expect("in-memory write");
        }
        w.write_record([
            "summary".to_string(),
            "network_wc_util".to_string(),
            String::new(),
            self.network_wc_util.to_string(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn max_util(topo: &Topology, loads: &[Vec<f64>], e: EdgeId) -> f64 {
    let cap = topo.edge_capacity(e);
    loads.iter().map(|l| l[e.0] / cap).fold(0.0, f64::max)
}

pub fn worst_case_utilization(
    topo: &Topology,
    matrix: &TrafficMatrix,
    scenarios: &[FailureScenario],
) -> Result<UtilizationReport, AnalysisError> {
    if scenarios.is_empty() {
        return Err(AnalysisError::EmptyScenarioSet);
    }
    let per_scenario: Vec<(Vec<f64>, Vec<String>)> = scenarios
        .par_iter()
        .map(|sc| {
            let mut router = ScenarioRouter::new(topo, sc)?;
            let mut loads = vec![0.0; topo.edge_count()];
            let unrouted = accumulate(topo, &mut router, matrix.demands(), &mut loads);
            Ok((loads, unrouted))
        })
        .collect::<Result<_, RoutingError>>()?;

    let mut unrouted = Vec::new();
    let mut per_scenario_loads = Vec::with_capacity(scenarios.len());
    for (sc, (loads, missing)) in scenarios.iter().zip(per_scenario) {
        unrouted.extend(missing.into_iter().map(|demand| UnroutedDemand {
            scenario: sc.label(topo),
            demand,
        }));
        per_scenario_loads.push(loads);
    }
    let wc_link_util: Vec<f64> = topo
        .edge_ids()
        .map(|e| max_util(topo, &per_scenario_loads, e))
        .collect();
    let network_wc_util = wc_link_util.iter().copied().fold(0.0, f64::max);
    Ok(UtilizationReport {
        scenarios: scenarios.to_vec(),
        per_scenario_loads,
        wc_link_util,
        network_wc_util,
        unrouted,
    })
}

/// What a set of new demands would do to the paths they use.
#[derive(Debug, Clone, PartialEq)]
pub struct PathImpact {
    pub used_edges: BTreeSet<EdgeId>,
    pub wc_path_util: f64,
    pub wc_path_latency_ms: f64,
    pub any_unrouted: bool,
}

impl PathImpact {
    /// Remaining capacity margin on the used paths, `1 - wc_path_util`.
    pub fn remaining(&self) -> f64 {
        1.0 - self.wc_path_util
    }
}

/// Committed loads per scenario plus the memoised routing behind them.
///
/// Demands are accumulated in insertion order, so a model fed the same matrix
/// produces bit-identical loads however it was built.
#[derive(Debug, Clone)]
pub struct LoadModel {
    routers: Vec<ScenarioRouter>,
    loads: Vec<Vec<f64>>,
    demand_count: usize,
}

impl LoadModel {
    pub fn new(topo: &Topology, scenarios: &[FailureScenario]) -> Result<Self, AnalysisError> {
        if scenarios.is_empty() {
            return Err(AnalysisError::EmptyScenarioSet);
        }
        let routers = scenarios
            .iter()
            .map(|sc| ScenarioRouter::new(topo, sc))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LoadModel {
            loads: vec![vec![0.0; topo.edge_count()]; routers.len()],
            routers,
            demand_count: 0,
        })
    }

    pub fn with_matrix(
        topo: &Topology,
        scenarios: &[FailureScenario],
        matrix: &TrafficMatrix,
    ) -> Result<Self, AnalysisError> {
        let mut model = Self::new(topo, scenarios)?;
        model.add_demands(topo, matrix.demands());
        Ok(model)
    }

    /// Number of demands folded into the loads so far.
    pub fn demand_count(&self) -> usize {
        self.demand_count
    }

    pub fn scenario_loads(&self) -> &[Vec<f64>] {
        &self.loads
    }

    pub fn add_demands(&mut self, topo: &Topology, demands: &[Demand]) {
        for (router, loads) in self.routers.iter_mut().zip(&mut self.loads) {
            accumulate(topo, router, demands, loads);
        }
        self.demand_count += demands.len();
    }

    pub fn network_wc_util(&self, topo: &Topology) -> f64 {
        topo.edge_ids()
            .map(|e| max_util(topo, &self.loads, e))
            .fold(0.0, f64::max)
    }

    /// Evaluates `new_demands` on top of the committed loads without mutating them.
    pub fn impact(
        &mut self,
        topo: &Topology,
        new_demands: &[Demand],
        reading: WcpuReading,
    ) -> PathImpact {
        let mut used_edges = BTreeSet::new();
        let mut any_unrouted = false;
        let mut latency: f64 = 0.0;
        let mut combined = Vec::with_capacity(self.loads.len());
        let mut per_scenario_util: f64 = 0.0;

        for (router, base) in self.routers.iter_mut().zip(&self.loads) {
            let mut loads = base.clone();
            let mut used_here = BTreeSet::new();
            for d in new_demands {
                match router.route(topo, d.src, d.dst) {
                    UnitRoute::Routed {
                        fractions,
                        latency: lat,
                    } => {
                        latency = latency.max(lat.max_ms);
                        for &(e, f) in fractions.iter() {
                            let mbps = f * d.bandwidth_mbps;
                            loads[e.0] += mbps;
                            if mbps > 0.0 {
                                used_here.insert(e);
                            }
                        }
                    }
                    UnitRoute::Disconnected => any_unrouted = true,
                    UnitRoute::EndpointDown => {}
                }
            }
            for &e in &used_here {
                per_scenario_util = per_scenario_util.max(loads[e.0] / topo.edge_capacity(e));
            }
            used_edges.extend(used_here);
            combined.push(loads);
        }

        let wc_path_util = match reading {
            WcpuReading::Union => used_edges
                .iter()
                .map(|&e| max_util(topo, &combined, e))
                .fold(0.0, f64::max),
            WcpuReading::PerScenario => per_scenario_util,
        };
        PathImpact {
            used_edges,
            wc_path_util,
            wc_path_latency_ms: latency,
            any_unrouted,
        }
    }
}

/// Impact of `new_demands` on top of `existing`, computed from scratch.
pub fn path_impact(
    topo: &Topology,
    existing: &TrafficMatrix,
    new_demands: &[Demand],
    scenarios: &[FailureScenario],
    reading: WcpuReading,
) -> Result<PathImpact, AnalysisError> {
    let mut model = LoadModel::with_matrix(topo, scenarios, existing)?;
    Ok(model.impact(topo, new_demands, reading))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::triangle;
    use crate::model::{enumerate_scenarios, FailureSetSpec};

    fn matrix(t: &Topology, ds: &[(&str, &str, f64)]) -> TrafficMatrix {
        TrafficMatrix::from_demands(
            ds.iter()
                .enumerate()
                .map(|(i, &(s, d, bw))| Demand::between(t, format!("d{i}"), s, d, bw).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn e(t: &Topology, a: &str, b: &str) -> usize {
        t.edge_between(a, b).unwrap().0
    }

    #[test]
    fn link_loads_examples() {
        let t = triangle();
        let m = matrix(&t, &[("a", "b", 300.0), ("b", "a", 300.0)]);
        let l = link_loads(&t, &m, &FailureScenario::none()).unwrap();
        assert_eq!(l[e(&t, "a", "b")], 300.0);
        assert_eq!(l[e(&t, "b", "a")], 300.0);
        assert_eq!(l.iter().sum::<f64>(), 600.0);

        let ab = FailureScenario::circuit(t.circuit_id("ab").unwrap());
        let l = link_loads(&t, &m, &ab).unwrap();
        for (x, y) in [("a", "c"), ("c", "b"), ("b", "c"), ("c", "a")] {
            assert_eq!(l[e(&t, x, y)], 300.0);
        }
        assert_eq!(l[e(&t, "a", "b")], 0.0);

        let l = link_loads(&t, &TrafficMatrix::new(), &FailureScenario::none()).unwrap();
        assert!(l.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn worst_case_examples() {
        let t = triangle();
        let scen = enumerate_scenarios(&t, &FailureSetSpec::with_circuits());
        let r = worst_case_utilization(&t, &matrix(&t, &[("a", "b", 300.0)]), &scen).unwrap();
        assert_eq!(r.wc_link_util[e(&t, "a", "c")], 0.3);
        assert_eq!(r.network_wc_util, 0.3);
        assert_eq!(r.resilient_growth_factor(0.95), Some(0.95 / 0.3));

        let r = worst_case_utilization(&t, &TrafficMatrix::new(), &scen).unwrap();
        assert_eq!(r.network_wc_util, 0.0);
        assert_eq!(r.resilient_growth_factor(1.0), None);

        // ab down: 300 rerouted via c plus 400 direct on a->c.
        let m = matrix(&t, &[("a", "b", 300.0), ("a", "c", 400.0)]);
        let r = worst_case_utilization(&t, &m, &scen).unwrap();
        assert!((r.wc_link_util[e(&t, "a", "c")] - 0.7).abs() < 1e-12);

        assert_eq!(
            worst_case_utilization(&t, &m, &[]).unwrap_err(),
            AnalysisError::EmptyScenarioSet
        );
    }

    #[test]
    fn report_records_disconnections_and_csv() {
        let t = triangle();
        let mut cut = FailureScenario::circuit(t.circuit_id("ab").unwrap());
        cut.failed_circuits.insert(t.circuit_id("ac").unwrap());
        let node_a = FailureScenario::node(&t, t.node_id("a").unwrap());
        let m = matrix(&t, &[("a", "b", 300.0)]);
        let r = worst_case_utilization(&t, &m, &[FailureScenario::none(), cut, node_a]).unwrap();
        // Endpoint-down demands are excluded, not reported.
        assert_eq!(r.unrouted.len(), 1);
        assert_eq!(r.unrouted[0].demand, "d0");

        let csv = r.to_csv(&t);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("scenario,edge,load_mbps,utilization"));
        assert!(csv.contains("none,ab:a->b,300,0.3\n"));
        assert!(csv.contains("worst_case,ab:a->b,300,0.3\n"));
        assert!(csv.trim_end().ends_with("summary,network_wc_util,,0.3"));
        // 6 (none) + 2 (cut) + 2 (node a down) + 6 worst-case + header + summary
        assert_eq!(csv.lines().count(), 18);
    }

    #[test]
    fn path_impact_examples() {
        let t = triangle();
        let none = [FailureScenario::none()];
        let circuits = enumerate_scenarios(&t, &FailureSetSpec::with_circuits());
        let new = [Demand::between(&t, "n", "a", "b", 300.0).unwrap()];

        let p = path_impact(&t, &TrafficMatrix::new(), &new, &none, WcpuReading::Union).unwrap();
        assert_eq!(p.used_edges, BTreeSet::from([EdgeId(e(&t, "a", "b"))]));
        assert_eq!(p.wc_path_util, 0.3);
        assert_eq!(p.wc_path_latency_ms, 1.0);
        assert!(!p.any_unrouted);

        let p = path_impact(
            &t,
            &TrafficMatrix::new(),
            &new,
            &circuits,
            WcpuReading::Union,
        )
        .unwrap();
        let expect: BTreeSet<EdgeId> = [("a", "b"), ("a", "c"), ("c", "b")]
            .iter()
            .map(|&(x, y)| EdgeId(e(&t, x, y)))
            .collect();
        assert_eq!(p.used_edges, expect);
        assert_eq!(p.wc_path_util, 0.3);
        assert_eq!(p.wc_path_latency_ms, 2.0);

        let existing = matrix(&t, &[("c", "b", 800.0)]);
        for reading in [WcpuReading::Union, WcpuReading::PerScenario] {
            let p = path_impact(&t, &existing, &new, &circuits, reading).unwrap();
            assert!((p.wc_path_util - 1.1).abs() < 1e-12);
            assert!((p.remaining() + 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn readings_differ_when_worst_case_comes_from_unused_scenario() {
        // Existing b->c reroutes over b->a->c when bc fails, loading a->c to 0.6.
        // The new a->b demand only touches a->c when ab fails (load 0.1 there).
        let t = triangle();
        let circuits = enumerate_scenarios(&t, &FailureSetSpec::with_circuits());
        let existing = matrix(&t, &[("b", "c", 600.0)]);
        let new = [Demand::between(&t, "n", "a", "b", 100.0).unwrap()];
        let a = path_impact(&t, &existing, &new, &circuits, WcpuReading::Union).unwrap();
        let b = path_impact(&t, &existing, &new, &circuits, WcpuReading::PerScenario).unwrap();
        assert!((a.wc_path_util - 0.6).abs() < 1e-12);
        assert!((b.wc_path_util - 0.1).abs() < 1e-12);
        assert_eq!(a.used_edges, b.used_edges);
    }

    #[test]
    fn load_model_matches_from_scratch() {
        let t = triangle();
        let scen = enumerate_scenarios(&t, &FailureSetSpec::all());
        let m = matrix(
            &t,
            &[("a", "b", 310.5), ("c", "a", 17.25), ("b", "c", 99.0)],
        );
        let mut inc = LoadModel::new(&t, &scen).unwrap();
        for d in m.demands() {
            inc.add_demands(&t, std::slice::from_ref(d));
        }
        let full = worst_case_utilization(&t, &m, &scen).unwrap();
        assert_eq!(inc.scenario_loads(), full.per_scenario_loads.as_slice());
        assert_eq!(inc.network_wc_util(&t), full.network_wc_util);
        assert_eq!(inc.demand_count(), 3);
    }

    #[test]
    fn wcpu_reading_parses() {
        assert_eq!("a".parse::<WcpuReading>().unwrap(), WcpuReading::Union);
        assert_eq!(
            "b".parse::<WcpuReading>().unwrap(),
            WcpuReading::PerScenario
        );
        assert!("c".parse::<WcpuReading>().is_err());
    }
}
