use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CircuitId, ModelError, NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    None,
    Circuit(CircuitId),
    Node(NodeId),
    Srlg(String),
}

/// A network state with some elements removed. `None` is itself a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FailureScenario {
    pub kind: ScenarioKind,
    pub failed_circuits: BTreeSet<CircuitId>,
    pub failed_nodes: BTreeSet<NodeId>,
}

impl FailureScenario {
    pub fn none() -> Self {
        FailureScenario {
            kind: ScenarioKind::None,
            failed_circuits: BTreeSet::new(),
            failed_nodes: BTreeSet::new(),
        }
    }

    pub fn circuit(c: CircuitId) -> Self {
        FailureScenario {
            kind: ScenarioKind::Circuit(c),
            failed_circuits: BTreeSet::from([c]),
            failed_nodes: BTreeSet::new(),
        }
    }

    /// Fails `n` together with every incident circuit.
    pub fn node(topo: &Topology, n: NodeId) -> Self {
        FailureScenario {
            kind: ScenarioKind::Node(n),
            failed_circuits: topo.incident_circuits(n),
            failed_nodes: BTreeSet::from([n]),
        }
    }

    pub fn srlg(topo: &Topology, srlg: &str) -> Result<Self, ModelError> {
        let members = topo
            .srlgs()
            .get(srlg)
            .ok_or_else(|| ModelError::UnknownSrlg(srlg.to_string()))?;
        Ok(FailureScenario {
            kind: ScenarioKind::Srlg(srlg.to_string()),
            failed_circuits: members.clone(),
            failed_nodes: BTreeSet::new(),
        })
    }

    /// Parses a label produced by [`FailureScenario::label`].
    pub fn from_label(topo: &Topology, label: &str) -> Result<Self, ModelError> {
        match label.split_once(':') {
            None if label == "none" => Ok(Self::none()),
            Some(("circuit", c)) => topo
                .circuit_id(c)
                .map(Self::circuit)
                .ok_or_else(|| ModelError::UnknownCircuit(c.to_string())),
            Some(("node", n)) => Ok(Self::node(topo, topo.require_node(n)?)),
            Some(("srlg", s)) => Self::srlg(topo, s),
            _ => Err(ModelError::Syntax {
                line: 0,
                field: Some("scenario".into()),
                message: format!("unrecognised scenario label `{label}`"),
            }),
        }
    }

    /// `none`, `circuit:<id>`, `node:<id>` or `srlg:<id>`.
    pub fn label(&self, topo: &Topology) -> String {
        match &self.kind {
            ScenarioKind::None => "none".to_string(),
            ScenarioKind::Circuit(c) => format!("circuit:{}", topo.circuit(*c).id),
            ScenarioKind::Node(n) => format!("node:{}", topo.node_name(*n)),
            ScenarioKind::Srlg(s) => format!("srlg:{s}"),
        }
    }
}

/// Which scenario classes to evaluate. The no-failure scenario is always included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureSetSpec {
    #[serde(default = "yes")]
    pub include_none: bool,
    #[serde(default)]
    pub include_circuits: bool,
    #[serde(default)]
    pub include_nodes: bool,
    #[serde(default)]
    pub include_srlgs: bool,
}

fn yes() -> bool {
    true
}

impl Default for FailureSetSpec {
    fn default() -> Self {
        Self::none_only()
    }
}

impl FailureSetSpec {
    pub fn none_only() -> Self {
        FailureSetSpec {
            include_none: true,
            include_circuits: false,
            include_nodes: false,
            include_srlgs: false,
        }
    }

    pub fn with_circuits() -> Self {
        FailureSetSpec {
            include_circuits: true,
            ..Self::none_only()
        }
    }

    pub fn all() -> Self {
        FailureSetSpec {
            include_none: true,
            include_circuits: true,
            include_nodes: true,
            include_srlgs: true,
        }
    }

    /// Parses a comma list such as `none,circuits,nodes,srlgs`.
    pub fn parse_list(s: &str) -> Result<Self, String> {
        let mut spec = Self::none_only();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "none" => {}
                "circuits" | "links" => spec.include_circuits = true,
                "nodes" => spec.include_nodes = true,
                "srlgs" => spec.include_srlgs = true,
                "all" => spec = Self::all(),
                other => return Err(format!("unknown failure class `{other}`")),
            }
        }
        Ok(spec)
    }

    pub fn expected_count(&self, topo: &Topology) -> usize {
        usize::from(self.include_none)
            + usize::from(self.include_circuits) * topo.circuit_count()
            + usize::from(self.include_nodes) * topo.node_count()
            + usize::from(self.include_srlgs) * topo.srlgs().len()
    }
}

impl fmt::Display for FailureSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec!["none"];
        if self.include_circuits {
            parts.push("circuits");
        }
        if self.include_nodes {
            parts.push("nodes");
        }
        if self.include_srlgs {
            parts.push("srlgs");
        }
        f.write_str(&parts.join(","))
    }
}

/// Scenarios in deterministic order: none, circuits, nodes, SRLGs (each by id).
pub fn enumerate_scenarios(topo: &Topology, spec: &FailureSetSpec) -> Vec<FailureScenario> {
    let mut out = Vec::with_capacity(spec.expected_count(topo));
    if spec.include_none {
        out.push(FailureScenario::none());
    }
    if spec.include_circuits {
        out.extend((0..topo.circuit_count()).map(|c| FailureScenario::circuit(CircuitId(c))));
    }
    if spec.include_nodes {
        out.extend(topo.node_ids().map(|n| FailureScenario::node(topo, n)));
    }
    if spec.include_srlgs {
        for (id, members) in topo.srlgs() {
            out.push(FailureScenario {
                kind: ScenarioKind::Srlg(id.clone()),
                failed_circuits: members.clone(),
                failed_nodes: BTreeSet::new(),
            });
        }
    }
    out
}
