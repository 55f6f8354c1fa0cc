use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn desim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_desim"))
        .args(args)
        .output()
        .expect("run desim")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn place_prints_decision() {
    let out = desim(&[
        "place",
        "--topology",
        s(&fixture("flow11.topo")),
        "--demands",
        s(&fixture("flow11-background.csv")),
        "--request",
        s(&fixture("flow11-request.json")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["chosen"], "kcy");
    assert_eq!(v["evaluations"].as_array().unwrap().len(), 4);
}

#[test]
fn study_writes_csv_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = desim(&[
        "study",
        "--topology",
        s(&fixture("symmetric5.topo")),
        "--seed",
        "7",
        "--iterations",
        "2",
        "--algorithms",
        "de,random",
        "--out",
        dir.path().to_str().unwrap(),
        "--traces",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("algorithm,iterations,workloads_placed,aggregate_mbps,pct_of_de")
    );
    assert!(lines.next().unwrap().ends_with(",100.00"));
    for k in 0..2 {
        for algo in ["de", "random"] {
            assert!(dir
                .path()
                .join(format!("traces/iter-{k}-{algo}.csv"))
                .exists());
        }
    }
    // Same seed, same bytes.
    let again = tempfile::tempdir().unwrap();
    desim(&[
        "study",
        "--topology",
        s(&fixture("symmetric5.topo")),
        "--seed",
        "7",
        "--iterations",
        "2",
        "--algorithms",
        "de,random",
        "--out",
        again.path().to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read_to_string(again.path().join("study.csv")).unwrap(),
        csv
    );
}

#[test]
fn report_emits_utilisation_csv() {
    let out = desim(&[
        "report",
        "--topology",
        s(&fixture("flow11.topo")),
        "--demands",
        s(&fixture("flow11-background.csv")),
        "--failure-sets",
        "none,circuits",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("scenario,edge,load_mbps,utilization\n"));
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("summary,network_wc_util,,"));
}

#[test]
fn exit_codes_distinguish_input_errors() {
    assert_eq!(
        desim(&["check", "--topology", "/nonexistent.topo"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(desim(&["study", "--frobnicate"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.topo");
    std::fs::write(&bad, "node a\ncircuit x a zz 10 1 1\n").unwrap();
    let out = desim(&["check", "--topology", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));

    let out = desim(&["check", "--topology", s(&fixture("asymmetric11.topo"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        String::from_utf8_lossy(&out.stdout).contains("11 nodes (4 DC, 11 access), 170 circuits")
    );

    // Study output into a path that is a file, not a directory.
    let out = desim(&[
        "study",
        "--topology",
        s(&fixture("symmetric5.topo")),
        "--iterations",
        "1",
        "--out",
        s(&bad),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
