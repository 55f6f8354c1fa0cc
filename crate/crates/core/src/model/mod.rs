//! Network model: sites, bidirectional circuits, demands and failure scenarios.
//!
//! A [`Topology`] is immutable once built. Nodes and circuits are kept sorted by
//! id, so [`NodeId`] and [`CircuitId`] order matches the lexicographic order of
//! the string ids. Every circuit expands to two directed edges: edge `2c` runs
//! `end_a -> end_b` and edge `2c + 1` runs `end_b -> end_a`.

mod format;
mod scenario;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{
    demands_to_csv, parse_demands, parse_topology, topology_to_json, topology_to_text,
    FORMAT_VERSION,
};
pub use scenario::{enumerate_scenarios, FailureScenario, FailureSetSpec, ScenarioKind};

/// Index of a node in its [`Topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of a circuit in its [`Topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CircuitId(pub usize);

/// Index of a directed edge. Two per circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn circuit(self) -> CircuitId {
        CircuitId(self.0 / 2)
    }

    /// The edge running the other way over the same circuit.
    pub fn reverse(self) -> EdgeId {
        EdgeId(self.0 ^ 1)
    }
}

impl CircuitId {
    pub fn forward(self) -> EdgeId {
        EdgeId(self.0 * 2)
    }

    pub fn backward(self) -> EdgeId {
        EdgeId(self.0 * 2 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub is_dc_site: bool,
    pub is_access_site: bool,
}

impl Node {
    pub fn new(id: impl Into<String>, is_dc_site: bool, is_access_site: bool) -> Self {
        Node {
            id: id.into(),
            is_dc_site,
            is_access_site,
        }
    }
}

/// A bidirectional circuit. Capacity applies to each direction independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub id: String,
    pub end_a: String,
    pub end_b: String,
    pub capacity_mbps: f64,
    pub latency_ms: f64,
    pub igp_metric: u32,
    pub srlg_ids: BTreeSet<String>,
}

impl Circuit {
    pub fn new(
        id: impl Into<String>,
        end_a: impl Into<String>,
        end_b: impl Into<String>,
        capacity_mbps: f64,
        latency_ms: f64,
        igp_metric: u32,
    ) -> Self {
        Circuit {
            id: id.into(),
            end_a: end_a.into(),
            end_b: end_b.into(),
            capacity_mbps,
            latency_ms,
            igp_metric,
            srlg_ids: BTreeSet::new(),
        }
    }

    pub fn with_srlgs<I, S>(mut self, srlgs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.srlg_ids = srlgs.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}{}: {message}", field.as_ref().map(|f| format!(", field `{f}`")).unwrap_or_default())]
    Syntax {
        line: usize,
        field: Option<String>,
        message: String,
    },
    #[error("unsupported document version {0}")]
    UnsupportedVersion(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate circuit id `{0}`")]
    DuplicateCircuit(String),
    #[error("circuit `{circuit}` references unknown node `{node}`")]
    DanglingEndpoint { circuit: String, node: String },
    #[error("circuit `{0}` connects a node to itself")]
    SelfLoop(String),
    #[error("circuit `{circuit}` has non-positive capacity {value}")]
    NonPositiveCapacity { circuit: String, value: f64 },
    #[error("circuit `{circuit}` has invalid latency {value}")]
    InvalidLatency { circuit: String, value: f64 },
    #[error("circuit `{0}` has a zero IGP metric")]
    NonPositiveMetric(String),
    #[error("duplicate demand id `{0}`")]
    DuplicateDemand(String),
    #[error("demand `{demand}` references unknown node `{node}`")]
    UnknownEndpoint { demand: String, node: String },
    #[error("demand `{demand}` has invalid bandwidth {value}")]
    InvalidBandwidth { demand: String, value: f64 },
    #[error("demand `{0}` has identical source and destination")]
    DemandSelfLoop(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown circuit `{0}`")]
    UnknownCircuit(String),
    #[error("unknown SRLG `{0}`")]
    UnknownSrlg(String),
}

/// The simulated network.
#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<Node>,
    circuits: Vec<Circuit>,
    srlgs: BTreeMap<String, BTreeSet<CircuitId>>,
    node_index: HashMap<String, NodeId>,
    circuit_index: HashMap<String, CircuitId>,
    ends: Vec<(NodeId, NodeId)>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.circuits == other.circuits
    }
}

impl Topology {
    /// Validates and indexes a topology. Nodes and circuits are sorted by id.
    pub fn new(mut nodes: Vec<Node>, mut circuits: Vec<Circuit>) -> Result<Self, ModelError> {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        circuits.sort_by(|a, b| a.id.cmp(&b.id));

        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id.clone(), NodeId(i)).is_some() {
                return Err(ModelError::DuplicateNode(n.id.clone()));
            }
        }

        let mut circuit_index = HashMap::with_capacity(circuits.len());
        let mut ends = Vec::with_capacity(circuits.len());
        let mut srlgs: BTreeMap<String, BTreeSet<CircuitId>> = BTreeMap::new();
        for (i, c) in circuits.iter().enumerate() {
            if circuit_index.insert(c.id.clone(), CircuitId(i)).is_some() {
                return Err(ModelError::DuplicateCircuit(c.id.clone()));
            }
            let lookup = |node: &str| {
                node_index
                    .get(node)
                    .copied()
                    .ok_or_else(|| ModelError::DanglingEndpoint {
                        circuit: c.id.clone(),
                        node: node.to_string(),
                    })
            };
            let a = lookup(&c.end_a)?;
            let b = lookup(&c.end_b)?;
            if a == b {
                return Err(ModelError::SelfLoop(c.id.clone()));
            }
            if !(c.capacity_mbps > 0.0) || !c.capacity_mbps.is_finite() {
                return Err(ModelError::NonPositiveCapacity {
                    circuit: c.id.clone(),
                    value: c.capacity_mbps,
                });
            }
            if !(c.latency_ms >= 0.0) || !c.latency_ms.is_finite() {
                return Err(ModelError::InvalidLatency {
                    circuit: c.id.clone(),
                    value: c.latency_ms,
                });
            }
            if c.igp_metric == 0 {
                return Err(ModelError::NonPositiveMetric(c.id.clone()));
            }
            for s in &c.srlg_ids {
                srlgs.entry(s.clone()).or_default().insert(CircuitId(i));
            }
            ends.push((a, b));
        }

        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (i, &(a, b)) in ends.iter().enumerate() {
            let c = CircuitId(i);
            out_edges[a.0].push(c.forward());
            in_edges[b.0].push(c.forward());
            out_edges[b.0].push(c.backward());
            in_edges[a.0].push(c.backward());
        }

        Ok(Topology {
            nodes,
            circuits,
            srlgs,
            node_index,
            circuit_index,
            ends,
            out_edges,
            in_edges,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn srlgs(&self) -> &BTreeMap<String, BTreeSet<CircuitId>> {
        &self.srlgs
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn circuit_count(&self) -> usize {
        self.circuits.len()
    }

    pub fn edge_count(&self) -> usize {
        self.circuits.len() * 2
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_count()).map(EdgeId)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn circuit(&self, id: CircuitId) -> &Circuit {
        &self.circuits[id.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn circuit_id(&self, name: &str) -> Option<CircuitId> {
        self.circuit_index.get(name).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].id
    }

    /// Resolves a node name, failing with [`ModelError::UnknownNode`].
    pub fn require_node(&self, name: &str) -> Result<NodeId, ModelError> {
        self.node_id(name)
            .ok_or_else(|| ModelError::UnknownNode(name.to_string()))
    }

    pub fn circuit_ends(&self, id: CircuitId) -> (NodeId, NodeId) {
        self.ends[id.0]
    }

    pub fn edge_from(&self, e: EdgeId) -> NodeId {
        let (a, b) = self.ends[e.0 / 2];
        if e.0.is_multiple_of(2) {
            a
        } else {
            b
        }
    }

    pub fn edge_to(&self, e: EdgeId) -> NodeId {
        self.edge_from(e.reverse())
    }

    pub fn edge_capacity(&self, e: EdgeId) -> f64 {
        self.circuits[e.0 / 2].capacity_mbps
    }

    pub fn edge_latency(&self, e: EdgeId) -> f64 {
        self.circuits[e.0 / 2].latency_ms
    }

    pub fn edge_metric(&self, e: EdgeId) -> u64 {
        u64::from(self.circuits[e.0 / 2].igp_metric)
    }

    pub fn out_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.out_edges[n.0]
    }

    pub fn in_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.in_edges[n.0]
    }

    /// Circuits with `n` as an endpoint, in id order.
    pub fn incident_circuits(&self, n: NodeId) -> BTreeSet<CircuitId> {
        self.out_edges[n.0].iter().map(|e| e.circuit()).collect()
    }

    /// First directed edge `from -> to` (lowest circuit id), if any.
    pub fn edge_between(&self, from: &str, to: &str) -> Option<EdgeId> {
        let from = self.node_id(from)?;
        let to = self.node_id(to)?;
        self.out_edges[from.0]
            .iter()
            .copied()
            .filter(|&e| self.edge_to(e) == to)
            .min()
    }

    /// Human-readable label, `circuit:from->to`.
    pub fn edge_label(&self, e: EdgeId) -> String {
        format!(
            "{}:{}->{}",
            self.circuits[e.0 / 2].id,
            self.node_name(self.edge_from(e)),
            self.node_name(self.edge_to(e))
        )
    }

    pub fn dc_sites(&self) -> Vec<NodeId> {
        self.node_ids()
            .filter(|&n| self.nodes[n.0].is_dc_site)
            .collect()
    }

    pub fn access_sites(&self) -> Vec<NodeId> {
        self.node_ids()
            .filter(|&n| self.nodes[n.0].is_access_site)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &e in &self.out_edges[n.0] {
                let m = self.edge_to(e);
                if !seen[m.0] {
                    seen[m.0] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Non-fatal validation findings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.is_connected() {
            out.push("topology is not connected without failures".to_string());
        }
        out
    }
}

/// A directed bandwidth requirement between two sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub id: String,
    pub src: NodeId,
    pub dst: NodeId,
    pub bandwidth_mbps: f64,
}

impl Demand {
    pub fn new(
        id: impl Into<String>,
        src: NodeId,
        dst: NodeId,
        bandwidth_mbps: f64,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        if src == dst {
            return Err(ModelError::DemandSelfLoop(id));
        }
        if !(bandwidth_mbps >= 0.0) || !bandwidth_mbps.is_finite() {
            return Err(ModelError::InvalidBandwidth {
                demand: id,
                value: bandwidth_mbps,
            });
        }
        Ok(Demand {
            id,
            src,
            dst,
            bandwidth_mbps,
        })
    }

    /// Builds a demand from node names resolved against `topo`.
    pub fn between(
        topo: &Topology,
        id: impl Into<String>,
        src: &str,
        dst: &str,
        bandwidth_mbps: f64,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let resolve = |n: &str| {
            topo.node_id(n).ok_or_else(|| ModelError::UnknownEndpoint {
                demand: id.clone(),
                node: n.to_string(),
            })
        };
        let s = resolve(src)?;
        let d = resolve(dst)?;
        Demand::new(id, s, d, bandwidth_mbps)
    }
}

/// The committed demands, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrafficMatrix {
    demands: Vec<Demand>,
    ids: HashSet<String>,
}

impl TrafficMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_demands(demands: Vec<Demand>) -> Result<Self, ModelError> {
        let mut m = TrafficMatrix::new();
        for d in demands {
            m.push(d)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, d: Demand) -> Result<(), ModelError> {
        if !self.ids.insert(d.id.clone()) {
            return Err(ModelError::DuplicateDemand(d.id));
        }
        self.demands.push(d);
        Ok(())
    }

    /// Removes the last `n` demands.
    pub fn truncate_tail(&mut self, n: usize) {
        let keep = self.demands.len().saturating_sub(n);
        for d in self.demands.drain(keep..) {
            self.ids.remove(&d.id);
        }
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.ids.contains(id)
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn total_mbps(&self) -> f64 {
        self.demands.iter().map(|d| d.bandwidth_mbps).sum()
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// a, b, c fully meshed; capacity 1000, latency 1, metric 10.
    pub fn triangle() -> Topology {
        Topology::new(
            vec![
                Node::new("a", true, true),
                Node::new("b", true, true),
                Node::new("c", true, true),
            ],
            vec![
                Circuit::new("ab", "a", "b", 1000.0, 1.0, 10),
                Circuit::new("ac", "a", "c", 1000.0, 1.0, 10),
                Circuit::new("bc", "b", "c", 1000.0, 1.0, 10),
            ],
        )
        .unwrap()
    }

    /// a-b, b-d, a-c, c-d with metric 10; latencies 1, 1, 2, 2.
    pub fn square() -> Topology {
        Topology::new(
            vec![
                Node::new("a", false, true),
                Node::new("b", false, true),
                Node::new("c", false, true),
                Node::new("d", true, true),
            ],
            vec![
                Circuit::new("ab", "a", "b", 1000.0, 1.0, 10),
                Circuit::new("bd", "b", "d", 1000.0, 1.0, 10),
                Circuit::new("ac", "a", "c", 1000.0, 2.0, 10),
                Circuit::new("cd", "c", "d", 1000.0, 2.0, 10),
            ],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn triangle_counts() {
        let t = triangle();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.circuit_count(), 3);
        assert_eq!(t.edge_count(), 6);
        assert!(t.is_connected());
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn edges_share_circuit_attributes() {
        let t = triangle();
        for c in 0..t.circuit_count() {
            let c = CircuitId(c);
            let (f, b) = (c.forward(), c.backward());
            assert_eq!(t.edge_from(f), t.edge_to(b));
            assert_eq!(t.edge_to(f), t.edge_from(b));
            assert_eq!(t.edge_capacity(f), t.edge_capacity(b));
            assert_eq!(t.edge_metric(f), t.edge_metric(b));
            assert_eq!(f.reverse(), b);
        }
        let ab = t.edge_between("a", "b").unwrap();
        assert_eq!(t.edge_label(ab), "ab:a->b");
        assert_eq!(t.edge_label(ab.reverse()), "ab:b->a");
    }

    #[test]
    fn rejects_bad_circuits() {
        let nodes = || vec![Node::new("a", false, true), Node::new("b", false, true)];
        let err =
            Topology::new(nodes(), vec![Circuit::new("x", "a", "zzz", 1.0, 1.0, 1)]).unwrap_err();
        assert!(err.to_string().contains("zzz"));
        assert!(matches!(
            Topology::new(nodes(), vec![Circuit::new("x", "a", "b", 0.0, 1.0, 1)]),
            Err(ModelError::NonPositiveCapacity { .. })
        ));
        assert!(matches!(
            Topology::new(nodes(), vec![Circuit::new("x", "a", "b", 1.0, 1.0, 0)]),
            Err(ModelError::NonPositiveMetric(_))
        ));
        assert!(matches!(
            Topology::new(nodes(), vec![Circuit::new("x", "a", "a", 1.0, 1.0, 1)]),
            Err(ModelError::SelfLoop(_))
        ));
        assert!(matches!(
            Topology::new(nodes(), vec![Circuit::new("x", "a", "b", 1.0, -1.0, 1)]),
            Err(ModelError::InvalidLatency { .. })
        ));
        let mut dup = nodes();
        dup.push(Node::new("a", true, false));
        assert!(matches!(
            Topology::new(dup, vec![]),
            Err(ModelError::DuplicateNode(_))
        ));
    }

    #[test]
    fn disconnected_topology_warns() {
        let t = Topology::new(
            vec![Node::new("a", false, true), Node::new("b", false, true)],
            vec![],
        )
        .unwrap();
        assert!(!t.is_connected());
        assert_eq!(t.warnings().len(), 1);
    }

    #[test]
    fn demand_invariants() {
        let t = triangle();
        assert!(Demand::between(&t, "d1", "a", "a", 10.0).is_err());
        assert!(Demand::between(&t, "d1", "a", "b", -1.0).is_err());
        assert!(Demand::between(&t, "d1", "a", "zzz", 1.0).is_err());
        let mut m = TrafficMatrix::new();
        m.push(Demand::between(&t, "d1", "a", "b", 1.0).unwrap())
            .unwrap();
        assert!(matches!(
            m.push(Demand::between(&t, "d1", "b", "a", 1.0).unwrap()),
            Err(ModelError::DuplicateDemand(_))
        ));
        m.push(Demand::between(&t, "d2", "b", "a", 1.0).unwrap())
            .unwrap();
        m.truncate_tail(1);
        assert_eq!(m.len(), 1);
        assert!(!m.contains_id("d2"));
    }
}
