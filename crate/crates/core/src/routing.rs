//! IGP shortest-path routing with equal-cost multipath.
//!
//! Traffic toward a destination splits equally, hop by hop, across every
//! next-hop edge that lies on a shortest (by IGP metric) path.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Demand, EdgeId, FailureScenario, NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("scenario references unknown circuit index {0}")]
    UnknownCircuit(usize),
    #[error("scenario references unknown node index {0}")]
    UnknownNode(usize),
    #[error("source node `{0}` is not alive")]
    SourceDown(String),
}

/// Which nodes and directed edges survive a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliveMask {
    pub(crate) nodes: Vec<bool>,
    pub(crate) edges: Vec<bool>,
}

impl AliveMask {
    pub fn build(topo: &Topology, scenario: &FailureScenario) -> Result<Self, RoutingError> {
        let mut nodes = vec![true; topo.node_count()];
        let mut edges = vec![true; topo.edge_count()];
        for c in &scenario.failed_circuits {
            if c.0 >= topo.circuit_count() {
                return Err(RoutingError::UnknownCircuit(c.0));
            }
            edges[c.forward().0] = false;
            edges[c.backward().0] = false;
        }
        for n in &scenario.failed_nodes {
            if n.0 >= topo.node_count() {
                return Err(RoutingError::UnknownNode(n.0));
            }
            nodes[n.0] = false;
            for &e in topo.out_edges(*n) {
                edges[e.0] = false;
                edges[e.reverse().0] = false;
            }
        }
        Ok(AliveMask { nodes, edges })
    }

    pub fn node_alive(&self, n: NodeId) -> bool {
        self.nodes[n.0]
    }

    pub fn edge_alive(&self, e: EdgeId) -> bool {
        self.edges[e.0]
    }
}

/// A topology with a failure scenario applied.
#[derive(Debug, Clone)]
pub struct ResidualTopology<'a> {
    pub base: &'a Topology,
    pub scenario: FailureScenario,
    mask: AliveMask,
}

impl<'a> ResidualTopology<'a> {
    pub fn mask(&self) -> &AliveMask {
        &self.mask
    }

    pub fn alive_nodes(&self) -> BTreeSet<NodeId> {
        self.base
            .node_ids()
            .filter(|&n| self.mask.node_alive(n))
            .collect()
    }

    pub fn alive_edges(&self) -> BTreeSet<EdgeId> {
        self.base
            .edge_ids()
            .filter(|&e| self.mask.edge_alive(e))
            .collect()
    }
}

pub fn apply_failure<'a>(
    topo: &'a Topology,
    scenario: &FailureScenario,
) -> Result<ResidualTopology<'a>, RoutingError> {
    Ok(ResidualTopology {
        base: topo,
        scenario: scenario.clone(),
        mask: AliveMask::build(topo, scenario)?,
    })
}

/// Single-source shortest paths with all equal-cost predecessors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpfResult {
    pub source: NodeId,
    /// Total metric per node; `None` when unreachable.
    pub dist: Vec<Option<u64>>,
    /// Every alive edge `u -> v` with `dist[u] + metric = dist[v]`, in edge id order.
    pub ecmp_preds: Vec<Vec<EdgeId>>,
}

pub fn shortest_paths(res: &ResidualTopology<'_>, src: NodeId) -> Result<SpfResult, RoutingError> {
    if !res.mask.node_alive(src) {
        return Err(RoutingError::SourceDown(
            res.base.node_name(src).to_string(),
        ));
    }
    Ok(spf(res.base, &res.mask, src))
}

pub(crate) fn spf(topo: &Topology, mask: &AliveMask, src: NodeId) -> SpfResult {
    let n = topo.node_count();
    let mut dist: Vec<Option<u64>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src.0] = Some(0);
    // Ties pop in node-id order.
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u.0] {
            continue;
        }
        done[u.0] = true;
        for &e in topo.out_edges(u) {
            if !mask.edge_alive(e) {
                continue;
            }
            let v = topo.edge_to(e);
            let nd = d + topo.edge_metric(e);
            if dist[v.0].is_none_or(|old| nd < old) {
                dist[v.0] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }

    let mut ecmp_preds = vec![Vec::new(); n];
    for e in topo.edge_ids() {
        if !mask.edge_alive(e) {
            continue;
        }
        let (u, v) = (topo.edge_from(e), topo.edge_to(e));
        if let (Some(du), Some(dv)) = (dist[u.0], dist[v.0]) {
            if du + topo.edge_metric(e) == dv {
                ecmp_preds[v.0].push(e);
            }
        }
    }
    SpfResult {
        source: src,
        dist,
        ecmp_preds,
    }
}

/// Shortest-path sub-DAG from the SPF source to one destination.
struct PathDag {
    /// Nodes on some shortest path, ordered by distance from the source.
    order: Vec<NodeId>,
    /// On-path out-edges per node.
    next_hops: HashMap<NodeId, Vec<EdgeId>>,
}

fn path_dag(topo: &Topology, spf: &SpfResult, dst: NodeId) -> Option<PathDag> {
    spf.dist[dst.0]?;
    let mut on_path = BTreeSet::from([dst]);
    let mut stack = vec![dst];
    let mut next_hops: HashMap<NodeId, Vec<EdgeId>> = HashMap::new();
    while let Some(v) = stack.pop() {
        for &e in &spf.ecmp_preds[v.0] {
            let u = topo.edge_from(e);
            next_hops.entry(u).or_default().push(e);
            if on_path.insert(u) {
                stack.push(u);
            }
        }
    }
    for hops in next_hops.values_mut() {
        hops.sort();
    }
    let mut order: Vec<NodeId> = on_path.into_iter().collect();
    order.sort_by_key(|n| (spf.dist[n.0], *n));
    Some(PathDag { order, next_hops })
}

/// Per-edge fraction of one unit of traffic from the SPF source to `dst`.
/// `None` if `dst` is unreachable.
fn unit_fractions(topo: &Topology, spf: &SpfResult, dst: NodeId) -> Option<Vec<(EdgeId, f64)>> {
    let dag = path_dag(topo, spf, dst)?;
    let mut inflow: HashMap<NodeId, f64> = HashMap::from([(spf.source, 1.0)]);
    let mut edge_frac: BTreeMap<EdgeId, f64> = BTreeMap::new();
    for &u in &dag.order {
        if u == dst {
            continue;
        }
        let Some(hops) = dag.next_hops.get(&u) else {
            continue;
        };
        let share = inflow.get(&u).copied().unwrap_or(0.0) / hops.len() as f64;
        for &e in hops {
            *edge_frac.entry(e).or_insert(0.0) += share;
            *inflow.entry(topo.edge_to(e)).or_insert(0.0) += share;
        }
    }
    Some(edge_frac.into_iter().collect())
}

/// Min and max latency over the ECMP shortest paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyRange {
    pub min_ms: f64,
    pub max_ms: f64,
}

fn latency_range(topo: &Topology, spf: &SpfResult, dst: NodeId) -> Option<LatencyRange> {
    let dag = path_dag(topo, spf, dst)?;
    let mut best: HashMap<NodeId, LatencyRange> = HashMap::from([(
        spf.source,
        LatencyRange {
            min_ms: 0.0,
            max_ms: 0.0,
        },
    )]);
    for &u in &dag.order {
        let Some(here) = best.get(&u).copied() else {
            continue;
        };
        for &e in dag.next_hops.get(&u).map(Vec::as_slice).unwrap_or_default() {
            let lat = topo.edge_latency(e);
            let v = topo.edge_to(e);
            let entry = best.entry(v).or_insert(LatencyRange {
                min_ms: f64::INFINITY,
                max_ms: f64::NEG_INFINITY,
            });
            entry.min_ms = entry.min_ms.min(here.min_ms + lat);
            entry.max_ms = entry.max_ms.max(here.max_ms + lat);
        }
    }
    best.get(&dst).copied()
}

/// Per-directed-edge traffic in Mbps. Only edges with a contribution are stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowMap {
    pub load: BTreeMap<EdgeId, f64>,
}

impl FlowMap {
    pub fn get(&self, e: EdgeId) -> f64 {
        self.load.get(&e).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.load.is_empty()
    }

    /// Net outflow at `n` (out minus in).
    pub fn net_outflow(&self, topo: &Topology, n: NodeId) -> f64 {
        let out: f64 = topo.out_edges(n).iter().map(|&e| self.get(e)).sum();
        let inn: f64 = topo.in_edges(n).iter().map(|&e| self.get(e)).sum();
        out - inn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteStatus {
    Routed,
    /// Source or destination is failed; the demand is excluded from the scenario.
    EndpointDown,
    /// Both endpoints alive but no path exists.
    Disconnected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedDemand {
    pub status: RouteStatus,
    pub flow: FlowMap,
}

impl RoutedDemand {
    pub fn is_routed(&self) -> bool {
        self.status == RouteStatus::Routed
    }
}

fn scale(fracs: &[(EdgeId, f64)], bandwidth_mbps: f64) -> FlowMap {
    FlowMap {
        load: fracs
            .iter()
            .map(|&(e, f)| (e, f * bandwidth_mbps))
            .collect(),
    }
}

pub fn route_demand(res: &ResidualTopology<'_>, d: &Demand) -> RoutedDemand {
    let unrouted = |status| RoutedDemand {
        status,
        flow: FlowMap::default(),
    };
    if !res.mask.node_alive(d.src) || !res.mask.node_alive(d.dst) {
        return unrouted(RouteStatus::EndpointDown);
    }
    let spf = spf(res.base, &res.mask, d.src);
    match unit_fractions(res.base, &spf, d.dst) {
        Some(fracs) => RoutedDemand {
            status: RouteStatus::Routed,
            flow: scale(&fracs, d.bandwidth_mbps),
        },
        None => unrouted(RouteStatus::Disconnected),
    }
}

/// `None` when `src` is down or `dst` is unreachable.
pub fn path_latency_extremes(
    res: &ResidualTopology<'_>,
    src: NodeId,
    dst: NodeId,
) -> Option<LatencyRange> {
    if !res.mask.node_alive(src) || !res.mask.node_alive(dst) {
        return None;
    }
    let spf = spf(res.base, &res.mask, src);
    latency_range(res.base, &spf, dst)
}

/// Routing outcome for a unit demand, reusable across bandwidths.
#[derive(Debug, Clone)]
pub enum UnitRoute {
    EndpointDown,
    Disconnected,
    Routed {
        fractions: Arc<[(EdgeId, f64)]>,
        latency: LatencyRange,
    },
}

impl UnitRoute {
    pub fn status(&self) -> RouteStatus {
        match self {
            UnitRoute::EndpointDown => RouteStatus::EndpointDown,
            UnitRoute::Disconnected => RouteStatus::Disconnected,
            UnitRoute::Routed { .. } => RouteStatus::Routed,
        }
    }
}

/// Memoised routing for one scenario. Routing is independent of the demand
/// set, so results stay valid for the lifetime of the topology.
#[derive(Debug, Clone)]
pub struct ScenarioRouter {
    scenario: FailureScenario,
    mask: AliveMask,
    spf: HashMap<NodeId, SpfResult>,
    routes: HashMap<(NodeId, NodeId), UnitRoute>,
}

impl ScenarioRouter {
    pub fn new(topo: &Topology, scenario: &FailureScenario) -> Result<Self, RoutingError> {
        Ok(ScenarioRouter {
            scenario: scenario.clone(),
            mask: AliveMask::build(topo, scenario)?,
            spf: HashMap::new(),
            routes: HashMap::new(),
        })
    }

    pub fn scenario(&self) -> &FailureScenario {
        &self.scenario
    }

    pub fn mask(&self) -> &AliveMask {
        &self.mask
    }

    pub fn route(&mut self, topo: &Topology, src: NodeId, dst: NodeId) -> &UnitRoute {
        if !self.routes.contains_key(&(src, dst)) {
            let route = if !self.mask.node_alive(src) || !self.mask.node_alive(dst) {
                UnitRoute::EndpointDown
            } else {
                let mask = &self.mask;
                let spf = self.spf.entry(src).or_insert_with(|| spf(topo, mask, src));
                match (
                    unit_fractions(topo, spf, dst),
                    latency_range(topo, spf, dst),
                ) {
                    (Some(fracs), Some(latency)) => UnitRoute::Routed {
                        fractions: fracs.into(),
                        latency,
                    },
                    _ => UnitRoute::Disconnected,
                }
            };
            self.routes.insert((src, dst), route);
        }
        &self.routes[&(src, dst)]
    }
}
