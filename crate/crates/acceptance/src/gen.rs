//! Seeded topologies, matrices and requests for the acceptance checks.

use de_core::controller::{Leg, PlacementRequest};
use de_core::model::{Circuit, Demand, FailureSetSpec, Node, NodeId, Topology, TrafficMatrix};
use rand::seq::{index, IndexedRandom};
use rand::Rng;

/// a, b, c fully meshed, all DC and access; capacity 1000, latency 1, metric 10.
pub fn triangle() -> Topology {
    Topology::new(
        ["a", "b", "c"].map(|n| Node::new(n, true, true)).to_vec(),
        vec![
            Circuit::new("ab", "a", "b", 1000.0, 1.0, 10),
            Circuit::new("ac", "a", "c", 1000.0, 1.0, 10),
            Circuit::new("bc", "b", "c", 1000.0, 1.0, 10),
        ],
    )
    .expect("valid fixture")
}

/// Two equal-metric paths a-b-d and a-c-d; the c path has double latency.
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
    .expect("valid fixture")
}

/// Half the metrics are 10 so equal-cost paths are common.
fn metric<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    if rng.random_bool(0.5) {
        10
    } else {
        rng.random_range(1..=20)
    }
}

/// Connected topology on `n` nodes: a random spanning tree plus up to `n`
/// extra circuits, which may run parallel to existing ones. Every node is an
/// access site; at least one is a DC. One pair of circuits may share an SRLG.
pub fn random_topology<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Topology {
    assert!(n >= 2);
    let mut nodes: Vec<Node> = (0..n)
        .map(|i| Node::new(format!("n{i}"), rng.random_bool(0.5), true))
        .collect();
    let dc = rng.random_range(0..n);
    nodes[dc].is_dc_site = true;

    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i, rng.random_range(0..i))).collect();
    for _ in 0..rng.random_range(0..=n) {
        let pick = index::sample(rng, n, 2);
        pairs.push((pick.index(0), pick.index(1)));
    }
    let mut circuits: Vec<Circuit> = pairs
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| {
            Circuit::new(
                format!("c{k}"),
                format!("n{a}"),
                format!("n{b}"),
                *[1000.0, 2500.0, 10000.0].choose(rng).expect("non-empty"),
                f64::from(rng.random_range(1..=10u32)),
                metric(rng),
            )
        })
        .collect();
    if circuits.len() >= 2 && rng.random_bool(0.3) {
        let pick = index::sample(rng, circuits.len(), 2);
        for i in pick {
            circuits[i].srlg_ids.insert("shared".into());
        }
    }
    Topology::new(nodes, circuits).expect("generated topology is valid")
}

/// `count` demands between distinct random nodes.
pub fn random_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    topo: &Topology,
    count: usize,
    max_mbps: f64,
) -> TrafficMatrix {
    let n = topo.node_count();
    let demands = (0..count)
        .map(|i| {
            let pick = index::sample(rng, n, 2);
            Demand::new(
                format!("bg{i}"),
                NodeId(pick.index(0)),
                NodeId(pick.index(1)),
                rng.random_range(1.0..=max_mbps),
            )
            .expect("positive bandwidth")
        })
        .collect();
    TrafficMatrix::from_demands(demands).expect("unique ids")
}

/// A request over a random subset of access sites with every DC as a
/// candidate, asymmetric legs, and a random failure class selection.
pub fn random_request<R: Rng + ?Sized>(rng: &mut R, topo: &Topology, id: &str) -> PlacementRequest {
    let access = topo.access_sites();
    let k = rng.random_range(1..=access.len());
    let mut a_ends: Vec<NodeId> = index::sample(rng, access.len(), k)
        .into_iter()
        .map(|i| access[i])
        .collect();
    a_ends.sort();
    let legs = a_ends
        .iter()
        .map(|_| Leg {
            a_to_b_mbps: rng.random_range(1.0..=600.0),
            b_to_a_mbps: rng.random_range(1.0..=600.0),
        })
        .collect();
    let failure_spec = *[
        FailureSetSpec::none_only(),
        FailureSetSpec::with_circuits(),
        FailureSetSpec::all(),
    ]
    .choose(rng)
    .expect("non-empty");
    PlacementRequest {
        id: id.to_string(),
        a_ends,
        candidates: topo.dc_sites(),
        legs,
        l_max_ms: rng.random_range(2.0..=40.0),
        util_threshold: rng.random_range(0.2..=1.0),
        failure_spec,
    }
}

/// Copy of `topo` with every capacity multiplied by `k`.
pub fn scale_capacity(topo: &Topology, k: f64) -> Topology {
    let circuits = topo
        .circuits()
        .iter()
        .map(|c| Circuit {
            capacity_mbps: c.capacity_mbps * k,
            ..c.clone()
        })
        .collect();
    Topology::new(topo.nodes().to_vec(), circuits).expect("scaling keeps validity")
}

pub fn scale_matrix(m: &TrafficMatrix, k: f64) -> TrafficMatrix {
    TrafficMatrix::from_demands(
        m.demands()
            .iter()
            .map(|d| Demand {
                bandwidth_mbps: d.bandwidth_mbps * k,
                ..d.clone()
            })
            .collect(),
    )
    .expect("same ids")
}

pub fn scale_request(r: &PlacementRequest, k: f64) -> PlacementRequest {
    PlacementRequest {
        legs: r
            .legs
            .iter()
            .map(|l| Leg {
                a_to_b_mbps: l.a_to_b_mbps * k,
                b_to_a_mbps: l.b_to_a_mbps * k,
            })
            .collect(),
        ..r.clone()
    }
}
