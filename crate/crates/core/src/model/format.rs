//! Topology and demand documents.
//!
//! Topologies are JSON (`{"version":1,"nodes":[...],"circuits":[...]}`) or a
//! line-oriented text form:
//!
//! ```text
//! # version: 1
//! node chi dc access
//! circuit chi-nyc chi nyc 10000 9.0 90 fiber7,fiber9
//! ```
//!
//! Demands are CSV with an optional `id,src,dst,mbps` header, or JSON
//! (`{"version":1,"demands":[{"id":..,"src":..,"dst":..,"mbps":..}]}`).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Circuit, Demand, ModelError, Node, Topology, TrafficMatrix};

pub const FORMAT_VERSION: u32 = 1;

const DEMAND_HEADER: [&str; 4] = ["id", "src", "dst", "mbps"];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    circuits: Vec<CircuitDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    #[serde(default)]
    dc: bool,
    #[serde(default)]
    access: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    id: String,
    a: String,
    b: String,
    capacity_mbps: f64,
    latency_ms: f64,
    metric: u32,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    srlgs: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandsDoc {
    #[serde(default)]
    version: Option<u32>,
    demands: Vec<DemandDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandDoc {
    id: String,
    src: String,
    dst: String,
    mbps: f64,
}

fn check_version(v: Option<u32>) -> Result<(), ModelError> {
    match v {
        None | Some(FORMAT_VERSION) => Ok(()),
        Some(other) => Err(ModelError::UnsupportedVersion(other.to_string())),
    }
}

fn syntax(line: usize, field: Option<&str>, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        field: field.map(str::to_string),
        message: message.into(),
    }
}

fn json_error(e: serde_json::Error) -> ModelError {
    syntax(e.line(), None, e.to_string())
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Scans leading `# version: N` comments.
fn comment_version(text: &str) -> Result<(), ModelError> {
    for line in text.lines() {
        let line = line.trim();
        let Some(comment) = line.strip_prefix('#') else {
            continue;
        };
        if let Some(v) = comment.trim().strip_prefix("version:") {
            let v = v.trim();
            if v != FORMAT_VERSION.to_string() {
                return Err(ModelError::UnsupportedVersion(v.to_string()));
            }
        }
    }
    Ok(())
}

/// Parses and validates a topology document (JSON or text form).
pub fn parse_topology(text: &str) -> Result<Topology, ModelError> {
    if looks_like_json(text) {
        let doc: TopologyDoc = serde_json::from_str(text).map_err(json_error)?;
        check_version(doc.version)?;
        let nodes = doc
            .nodes
            .into_iter()
            .map(|n| Node::new(n.id, n.dc, n.access))
            .collect();
        let circuits = doc
            .circuits
            .into_iter()
            .map(|c| Circuit {
                id: c.id,
                end_a: c.a,
                end_b: c.b,
                capacity_mbps: c.capacity_mbps,
                latency_ms: c.latency_ms,
                igp_metric: c.metric,
                srlg_ids: c.srlgs,
            })
            .collect();
        return Topology::new(nodes, circuits);
    }

    comment_version(text)?;
    let mut nodes = Vec::new();
    let mut circuits = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("node") => {
                let id = fields
                    .next()
                    .ok_or_else(|| syntax(lineno, Some("id"), "missing node id"))?;
                let mut node = Node::new(id, false, false);
                for flag in fields {
                    match flag {
                        "dc" => node.is_dc_site = true,
                        "access" => node.is_access_site = true,
                        other => {
                            return Err(syntax(
                                lineno,
                                Some("role"),
                                format!("unknown node role `{other}`"),
                            ))
                        }
                    }
                }
                nodes.push(node);
            }
            Some("circuit") => {
                let cols: Vec<&str> = fields.collect();
                if cols.len() < 6 || cols.len() > 7 {
                    return Err(syntax(
                        lineno,
                        None,
                        format!("circuit needs 6 or 7 fields, found {}", cols.len()),
                    ));
                }
                let number = |idx: usize, name: &str| -> Result<f64, ModelError> {
                    cols[idx].parse::<f64>().map_err(|_| {
                        syntax(
                            lineno,
                            Some(name),
                            format!("`{}` is not a number", cols[idx]),
                        )
                    })
                };
                let capacity = number(3, "capacity_mbps")?;
                let latency = number(4, "latency_ms")?;
                let metric = cols[5].parse::<u32>().map_err(|_| {
                    syntax(
                        lineno,
                        Some("metric"),
                        format!("`{}` is not a non-negative integer", cols[5]),
                    )
                })?;
                let srlgs: BTreeSet<String> = cols
                    .get(6)
                    .map(|s| {
                        s.split(',')
                            .filter(|x| !x.is_empty())
                            .map(str::to_string)
                            .collect()
                    })
                    .unwrap_or_default();
                circuits.push(Circuit {
                    id: cols[0].to_string(),
                    end_a: cols[1].to_string(),
                    end_b: cols[2].to_string(),
                    capacity_mbps: capacity,
                    latency_ms: latency,
                    igp_metric: metric,
                    srlg_ids: srlgs,
                });
            }
            Some(other) => {
                return Err(syntax(
                    lineno,
                    Some("kind"),
                    format!("expected `node` or `circuit`, found `{other}`"),
                ))
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    Topology::new(nodes, circuits)
}

/// Parses a demand document against `topo`.
pub fn parse_demands(text: &str, topo: &Topology) -> Result<TrafficMatrix, ModelError> {
    if looks_like_json(text) {
        let doc: DemandsDoc = serde_json::from_str(text).map_err(json_error)?;
        check_version(doc.version)?;
        let mut m = TrafficMatrix::new();
        for d in doc.demands {
            m.push(Demand::between(topo, d.id, &d.src, &d.dst, d.mbps)?)?;
        }
        return Ok(m);
    }

    comment_version(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut m = TrafficMatrix::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            syntax(line, None, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first && record.iter().eq(DEMAND_HEADER.iter().copied()) {
            first = false;
            continue;
        }
        first = false;
        if record.len() != 4 {
            return Err(syntax(
                line,
                None,
                format!(
                    "expected 4 fields (id,src,dst,mbps), found {}",
                    record.len()
                ),
            ));
        }
        let mbps: f64 = record[3].parse().map_err(|_| {
            syntax(
                line,
                Some("mbps"),
                format!("`{}` is not a number", &record[3]),
            )
        })?;
        m.push(Demand::between(
            topo, &record[0], &record[1], &record[2], mbps,
        )?)?;
    }
    Ok(m)
}

pub fn topology_to_json(topo: &Topology) -> String {
    let doc = TopologyDoc {
        version: Some(FORMAT_VERSION),
        nodes: topo
            .nodes()
            .iter()
            .map(|n| NodeDoc {
                id: n.id.clone(),
                dc: n.is_dc_site,
                access: n.is_access_site,
            })
            .collect(),
        circuits: topo
            .circuits()
            .iter()
            .map(|c| CircuitDoc {
                id: c.id.clone(),
                a: c.end_a.clone(),
                b: c.end_b.clone(),
                capacity_mbps: c.capacity_mbps,
                latency_ms: c.latency_ms,
                metric: c.igp_metric,
                srlgs: c.srlg_ids.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("topology serialises")
}

pub fn topology_to_text(topo: &Topology) -> String {
    let mut out = format!("# version: {FORMAT_VERSION}\n");
    for n in topo.nodes() {
        out.push_str("node ");
        out.push_str(&n.id);
        if n.is_dc_site {
            out.push_str(" dc");
        }
        if n.is_access_site {
            out.push_str(" access");
        }
        out.push('\n');
    }
    for c in topo.circuits() {
        let _ = write!(
            out,
            "circuit {} {} {} {} {} {}",
            c.id, c.end_a, c.end_b, c.capacity_mbps, c.latency_ms, c.igp_metric
        );
        if !c.srlg_ids.is_empty() {
            out.push(' ');
            out.push_str(&c.srlg_ids.iter().cloned().collect::<Vec<_>>().join(","));
        }
        out.push('\n');
    }
    out
}

pub fn demands_to_csv(topo: &Topology, matrix: &TrafficMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DEMAND_HEADER).expect("in-memory write");
    for d in matrix.demands() {
        w.write_record([
            d.id.as_str(),
            topo.node_name(d.src),
            topo.node_name(d.dst),
            &d.bandwidth_mbps.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    format!("# version: {FORMAT_VERSION}\n{body}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::triangle;
    use proptest::prelude::*;

    const TRIANGLE_JSON: &str = r#"{"version":1,
        "nodes":[{"id":"a","dc":true,"access":true},{"id":"b","dc":true},{"id":"c","access":true}],
        "circuits":[
          {"id":"ab","a":"a","b":"b","capacity_mbps":1000,"latency_ms":1,"metric":10},
          {"id":"ac","a":"a","b":"c","capacity_mbps":1000,"latency_ms":1,"metric":10,"srlgs":["s1"]},
          {"id":"bc","a":"b","b":"c","capacity_mbps":1000,"latency_ms":1,"metric":10,"srlgs":["s1"]}]}"#;

    #[test]
    fn parses_json_triangle() {
        let t = parse_topology(TRIANGLE_JSON).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.circuit_count(), 3);
        assert_eq!(t.edge_count(), 6);
        assert_eq!(t.srlgs()["s1"].len(), 2);
        assert!(t.node(t.node_id("b").unwrap()).is_dc_site);
        assert!(!t.node(t.node_id("b").unwrap()).is_access_site);
    }

    #[test]
    fn parses_text_triangle() {
        let text = "# version: 1\nnode a dc access\nnode b dc\nnode c access\n\
                    circuit ab a b 1000 1 10\ncircuit ac a c 1000 1 10 s1\ncircuit bc b c 1000 1 10 s1\n";
        let t = parse_topology(text).unwrap();
        assert_eq!(t, parse_topology(TRIANGLE_JSON).unwrap());
    }

    #[test]
    fn reports_semantic_errors() {
        let bad = TRIANGLE_JSON.replace(r#""b":"c""#, r#""b":"zzz""#);
        let err = parse_topology(&bad).unwrap_err();
        assert!(err.to_string().contains("zzz"), "{err}");

        let zero = TRIANGLE_JSON.replacen(r#""capacity_mbps":1000"#, r#""capacity_mbps":0"#, 1);
        assert!(matches!(
            parse_topology(&zero),
            Err(ModelError::NonPositiveCapacity { .. })
        ));

        let dup = TRIANGLE_JSON.replace(r#""id":"bc""#, r#""id":"ab""#);
        assert!(matches!(
            parse_topology(&dup),
            Err(ModelError::DuplicateCircuit(_))
        ));
    }

    #[test]
    fn reports_syntax_errors_with_line() {
        let err = parse_topology("node a\nnode b\ncircuit ab a b lots 1 10\n").unwrap_err();
        match err {
            ModelError::Syntax { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field.as_deref(), Some("capacity_mbps"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_topology("node a\nrouter b\n"),
            Err(ModelError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_topology("{\"nodes\": [}"),
            Err(ModelError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_topology(r#"{"version":2,"nodes":[]}"#),
            Err(ModelError::UnsupportedVersion(_))
        ));
        assert!(matches!(
            parse_topology("# version: 3\nnode a\n"),
            Err(ModelError::UnsupportedVersion(_))
        ));
    }

    #[test]
    fn parses_demands() {
        let t = triangle();
        let m = parse_demands("d1,a,b,300", &t).unwrap();
        assert_eq!(m.len(), 1);
        let d = &m.demands()[0];
        assert_eq!(
            (d.src, d.dst),
            (t.node_id("a").unwrap(), t.node_id("b").unwrap())
        );
        assert_eq!(d.bandwidth_mbps, 300.0);

        assert!(parse_demands("", &t).unwrap().is_empty());
        assert!(parse_demands("# version: 1\nid,src,dst,mbps\n", &t)
            .unwrap()
            .is_empty());
        assert!(matches!(
            parse_demands("d1,a,a,10", &t),
            Err(ModelError::DemandSelfLoop(_))
        ));
        assert!(matches!(
            parse_demands("d1,a,b,-1", &t),
            Err(ModelError::InvalidBandwidth { .. })
        ));
        assert!(matches!(
            parse_demands("d1,a,zzz,1", &t),
            Err(ModelError::UnknownEndpoint { .. })
        ));
        assert!(matches!(
            parse_demands("d1,a,b,1\nd1,b,a,1", &t),
            Err(ModelError::DuplicateDemand(_))
        ));
        assert!(matches!(
            parse_demands("id,src,dst,mbps\nd1,a,b,x", &t),
            Err(ModelError::Syntax { line: 2, .. })
        ));
        let json = r#"{"version":1,"demands":[{"id":"d1","src":"a","dst":"b","mbps":300}]}"#;
        assert_eq!(parse_demands(json, &t).unwrap(), m);
    }

    fn arb_topology() -> impl Strategy<Value = Topology> {
        (2usize..7)
            .prop_flat_map(|n| {
                let pairs: Vec<(usize, usize)> = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .collect();
                let k = pairs.len();
                (
                    Just(n),
                    Just(pairs),
                    proptest::collection::vec(
                        (
                            any::<bool>(),
                            1u32..100_000,
                            0u32..400,
                            1u32..200,
                            proptest::option::of(0u8..3),
                        ),
                        k,
                    ),
                    proptest::collection::vec((any::<bool>(), any::<bool>()), n),
                )
            })
            .prop_map(|(n, pairs, circ, roles)| {
                let nodes = (0..n)
                    .map(|i| Node::new(format!("n{i}"), roles[i].0, roles[i].1))
                    .collect();
                let circuits = pairs
                    .iter()
                    .zip(circ)
                    .filter(|(_, c)| c.0)
                    .map(|(&(i, j), (_, cap, lat, metric, srlg))| {
                        let mut c = Circuit::new(
                            format!("c{i}-{j}"),
                            format!("n{i}"),
                            format!("n{j}"),
                            f64::from(cap) / 8.0,
                            f64::from(lat) / 10.0,
                            metric,
                        );
                        if let Some(s) = srlg {
                            c = c.with_srlgs([format!("g{s}")]);
                        }
                        c
                    })
                    .collect();
                Topology::new(nodes, circuits).unwrap()
            })
    }

    proptest! {
        #[test]
        fn topology_round_trip(t in arb_topology()) {
            prop_assert_eq!(&parse_topology(&topology_to_json(&t)).unwrap(), &t);
            prop_assert_eq!(&parse_topology(&topology_to_text(&t)).unwrap(), &t);
        }

        #[test]
        fn demand_round_trip(bws in proptest::collection::vec((0usize..3, 1usize..3, 0.0f64..1e6), 0..20)) {
            let t = triangle();
            let mut m = TrafficMatrix::new();
            for (i, (s, off, bw)) in bws.into_iter().enumerate() {
                let src = crate::model::NodeId(s);
                let dst = crate::model::NodeId((s + off) % 3);
                m.push(Demand::new(format!("d{i}"), src, dst, bw).unwrap()).unwrap();
            }
            prop_assert_eq!(parse_demands(&demands_to_csv(&t, &m), &t).unwrap(), m);
        }
    }
}
