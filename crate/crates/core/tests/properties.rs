//! Routing and analysis invariants on generated topologies.

use de_core::analysis::{link_loads, path_impact, worst_case_utilization, WcpuReading};
use de_core::model::{
    enumerate_scenarios, Circuit, Demand, FailureScenario, FailureSetSpec, Node, NodeId, Topology,
    TrafficMatrix,
};
use de_core::routing::{apply_failure, route_demand, shortest_paths, RouteStatus};
use proptest::prelude::*;

const EPS: f64 = 1e-9;

/// Connected graph: a random spanning tree plus extra circuits.
fn topology() -> impl Strategy<Value = Topology> {
    (2usize..=7).prop_flat_map(|n| {
        let tree = (1..n).map(|i| 0..i).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n), 0..=n);
        let attrs = prop::collection::vec((1u32..=20, 100.0f64..2000.0, 0.5f64..10.0), 2 * n + 1);
        (Just(n), tree, extra, attrs).prop_map(|(n, tree, extra, attrs)| {
            let nodes = (0..n)
                .map(|i| Node::new(format!("n{i}"), true, true))
                .collect();
            let pairs = tree
                .into_iter()
                .enumerate()
                .map(|(i, parent)| (i + 1, parent))
                .chain(extra.into_iter().filter(|(a, b)| a != b));
            let circuits = pairs
                .zip(attrs.into_iter().cycle())
                .enumerate()
                .map(|(k, ((a, b), (metric, cap, lat)))| {
                    Circuit::new(
                        format!("c{k}"),
                        format!("n{a}"),
                        format!("n{b}"),
                        cap,
                        lat,
                        metric,
                    )
                })
                .collect();
            Topology::new(nodes, circuits).expect("generated topology is valid")
        })
    })
}

fn demands(n: usize, max: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..n, 0..n, 1.0f64..500.0), 0..=max)
        .prop_map(|v| v.into_iter().filter(|(s, d, _)| s != d).collect())
}

fn matrix(ds: &[(usize, usize, f64)], prefix: &str) -> TrafficMatrix {
    TrafficMatrix::from_demands(
        ds.iter()
            .enumerate()
            .map(|(i, &(s, d, bw))| {
                Demand::new(format!("{prefix}{i}"), NodeId(s), NodeId(d), bw).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

type Demands = Vec<(usize, usize, f64)>;

fn topo_and_demands() -> impl Strategy<Value = (Topology, Demands, Demands)> {
    topology().prop_flat_map(|t| {
        let n = t.node_count();
        (Just(t), demands(n, 6), demands(n, 6))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn flow_is_conserved((t, ds, _) in topo_and_demands(), fail in any::<prop::sample::Index>()) {
        let c = fail.index(t.circuit_count());
        let scenarios = [FailureScenario::none(), FailureScenario::circuit(de_core::model::CircuitId(c))];
        for sc in &scenarios {
            let res = apply_failure(&t, sc).unwrap();
            for (i, &(s, d, bw)) in ds.iter().enumerate() {
                let r = route_demand(&res, &Demand::new(format!("d{i}"), NodeId(s), NodeId(d), bw).unwrap());
                if r.status != RouteStatus::Routed {
                    prop_assert!(r.flow.is_empty());
                    continue;
                }
                for n in t.node_ids() {
                    let expect = if n == NodeId(s) { bw } else if n == NodeId(d) { -bw } else { 0.0 };
                    prop_assert!((r.flow.net_outflow(&t, n) - expect).abs() < EPS);
                }
                for e in t.edge_ids() {
                    prop_assert!(r.flow.get(e) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn loads_superpose((t, a, b) in topo_and_demands()) {
        let ma = matrix(&a, "a");
        let mb = matrix(&b, "b");
        let mut both = ma.clone();
        for d in mb.demands() {
            both.push(d.clone()).unwrap();
        }
        let none = FailureScenario::none();
        let (la, lb, lab) = (
            link_loads(&t, &ma, &none).unwrap(),
            link_loads(&t, &mb, &none).unwrap(),
            link_loads(&t, &both, &none).unwrap(),
        );
        for e in 0..t.edge_count() {
            prop_assert!((la[e] + lb[e] - lab[e]).abs() < EPS * (1.0 + lab[e]));
            // Adding demands never lowers a load.
            prop_assert!(lab[e] >= la[e] - EPS);
        }
    }

    #[test]
    fn loads_scale_linearly((t, a, _) in topo_and_demands(), k in 0.1f64..10.0) {
        let m = matrix(&a, "a");
        let scaled = TrafficMatrix::from_demands(
            m.demands().iter().map(|d| Demand { bandwidth_mbps: d.bandwidth_mbps * k, ..d.clone() }).collect(),
        ).unwrap();
        let none = FailureScenario::none();
        let (l, ls) = (link_loads(&t, &m, &none).unwrap(), link_loads(&t, &scaled, &none).unwrap());
        for e in 0..t.edge_count() {
            prop_assert!((l[e] * k - ls[e]).abs() < EPS * (1.0 + ls[e]));
        }
    }

    #[test]
    fn failures_never_shorten_paths(t in topology(), fail in any::<prop::sample::Index>(), node in any::<prop::sample::Index>()) {
        let base = apply_failure(&t, &FailureScenario::none()).unwrap();
        let c = de_core::model::CircuitId(fail.index(t.circuit_count()));
        let n = NodeId(node.index(t.node_count()));
        for sc in [FailureScenario::circuit(c), FailureScenario::node(&t, n)] {
            let res = apply_failure(&t, &sc).unwrap();
            for src in t.node_ids().filter(|&s| !sc.failed_nodes.contains(&s)) {
                let before = shortest_paths(&base, src).unwrap();
                let after = shortest_paths(&res, src).unwrap();
                for v in t.node_ids() {
                    match (before.dist[v.0], after.dist[v.0]) {
                        (Some(x), Some(y)) => prop_assert!(y >= x),
                        (None, Some(_)) => prop_assert!(false, "failure made {v:?} reachable"),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn worst_case_dominates_each_scenario((t, a, b) in topo_and_demands()) {
        let m = matrix(&a, "a");
        let scenarios = enumerate_scenarios(&t, &FailureSetSpec::all());
        let r = worst_case_utilization(&t, &m, &scenarios).unwrap();
        for loads in &r.per_scenario_loads {
            for e in t.edge_ids() {
                prop_assert!(r.wc_link_util[e.0] >= loads[e.0] / t.edge_capacity(e));
            }
        }
        // Path utilisation with more committed traffic is never lower.
        let new: Vec<Demand> = matrix(&b, "n").demands().to_vec();
        let empty = TrafficMatrix::new();
        for reading in [WcpuReading::Union, WcpuReading::PerScenario] {
            let lo = path_impact(&t, &empty, &new, &scenarios, reading).unwrap();
            let hi = path_impact(&t, &m, &new, &scenarios, reading).unwrap();
            prop_assert!(hi.wc_path_util >= lo.wc_path_util - EPS);
            prop_assert_eq!(&lo.used_edges, &hi.used_edges);
        }
    }
}
