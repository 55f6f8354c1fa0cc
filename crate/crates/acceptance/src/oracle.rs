//! Routing by exhaustive simple-path enumeration.

use de_core::model::{EdgeId, FailureScenario, NodeId, Topology};

fn alive(topo: &Topology, sc: &FailureScenario, e: EdgeId) -> bool {
    let (a, b) = topo.circuit_ends(e.circuit());
    !sc.failed_circuits.contains(&e.circuit())
        && !sc.failed_nodes.contains(&a)
        && !sc.failed_nodes.contains(&b)
}

/// `dist[s][t]`: cheapest simple-path metric from `s` to `t`, found by trying
/// every simple path out of `s`. `None` when unreachable or an endpoint is down.
pub fn all_pairs_distances(topo: &Topology, sc: &FailureScenario) -> Vec<Vec<Option<u64>>> {
    fn walk(
        topo: &Topology,
        sc: &FailureScenario,
        at: NodeId,
        cost: u64,
        seen: &mut [bool],
        best: &mut [Option<u64>],
    ) {
        let slot = &mut best[at.0];
        *slot = Some(slot.map_or(cost, |b| b.min(cost)));
        for &e in topo.out_edges(at) {
            let next = topo.edge_to(e);
            if seen[next.0] || !alive(topo, sc, e) {
                continue;
            }
            seen[next.0] = true;
            walk(topo, sc, next, cost + topo.edge_metric(e), seen, best);
            seen[next.0] = false;
        }
    }
    topo.node_ids()
        .map(|s| {
            let mut best = vec![None; topo.node_count()];
            if !sc.failed_nodes.contains(&s) {
                let mut seen = vec![false; topo.node_count()];
                seen[s.0] = true;
                walk(topo, sc, s, 0, &mut seen, &mut best);
            }
            best
        })
        .collect()
}

/// Per-edge load of `mbps` from `src` to `dst`, split equally over the
/// shortest-path next hops at every node, recursively. All zero if unreachable.
pub fn brute_route(
    topo: &Topology,
    sc: &FailureScenario,
    dist: &[Vec<Option<u64>>],
    src: NodeId,
    dst: NodeId,
    mbps: f64,
) -> Vec<f64> {
    let mut load = vec![0.0; topo.edge_count()];
    let to_dst = |n: NodeId| dist[n.0][dst.0];
    if to_dst(src).is_none() {
        return load;
    }
    let mut stack = vec![(src, mbps)];
    while let Some((v, amount)) = stack.pop() {
        if v == dst {
            continue;
        }
        let dv = to_dst(v).expect("only nodes on shortest paths are pushed");
        let hops: Vec<EdgeId> = topo
            .out_edges(v)
            .iter()
            .copied()
            .filter(|&e| alive(topo, sc, e))
            .filter(|&e| to_dst(topo.edge_to(e)).is_some_and(|dw| dw + topo.edge_metric(e) == dv))
            .collect();
        let share = amount / hops.len() as f64;
        for e in hops {
            load[e.0] += share;
            stack.push((topo.edge_to(e), share));
        }
    }
    load
}
