use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn discset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn solve_empty_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "empty.json");
    std::fs::write(&inst, r#"{"scale": 1000, "objects": [], "points": []}"#).unwrap();
    for problem in ["is", "ds"] {
        let out = discset(&["solve", "--instance", &inst, "--problem", problem, "--t", "2"]);
        assert_eq!(out.status.code(), Some(0));
        let sol: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(sol["size"], 0);
        assert_eq!(sol["selected"], Value::Array(vec![]));
    }
}

#[test]
fn solve_output_passes_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "inst.json");
    assert!(discset(&["gen", "--seed", "9", "--m", "14", "--n", "35", "--shape", "square", "--out", &inst])
        .status
        .success());
    for problem in ["is", "ds"] {
        let sol = path(dir.path(), &format!("{problem}.json"));
        let out = discset(&["solve", "--instance", &inst, "--problem", problem, "--t", "2", "--seed", "4", "--out", &sol]);
        assert!(out.status.success());
        let out = discset(&["verify", "--instance", &inst, "--solution", &sol, "--trials", "500"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["solution"]["locally_optimal"], true);
    }
}

#[test]
fn verify_rejects_infeasible_solution() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "inst.json");
    std::fs::write(
        &inst,
        r#"{"scale": 1000, "objects": [{"kind": "disk", "cx": 0, "cy": 0, "extent": 5},
             {"kind": "disk", "cx": 3, "cy": 0, "extent": 5}], "points": [[1, 0]]}"#,
    )
    .unwrap();
    let sol = path(dir.path(), "sol.json");
    std::fs::write(
        &sol,
        r#"{"problem": "is", "t": 1, "seed": 0, "size": 2, "selected": [0, 1],
            "trace": {"passes": 0, "converged": true, "elapsed_ms": 0, "exchanges": []}}"#,
    )
    .unwrap();
    let out = discset(&["verify", "--instance", &inst, "--solution", &sol]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "verification_failed");
}

#[test]
fn exit_codes() {
    let out = discset(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "usage");

    assert_eq!(discset(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"scale\": 1000, \"objects\": [").unwrap();
    let out = discset(&["exact", "--instance", &bad, "--problem", "is"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "parse");

    let inst = path(dir.path(), "inst.json");
    discset(&["gen", "--seed", "1", "--m", "12", "--n", "30", "--out", &inst]);
    let out = discset(&["exact", "--instance", &inst, "--problem", "ds", "--budget", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "budget_exhausted");
    let out = discset(&["exact", "--instance", &inst, "--problem", "ds"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reduce_k4() {
    let dir = tempfile::tempdir().unwrap();
    let graph = path(dir.path(), "k4.dimacs");
    std::fs::write(&graph, "c K4\np edge 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n").unwrap();
    let out_dir = path(dir.path(), "out");
    let out = discset(&["reduce", "--graph", &graph, "--out-dir", &out_dir]);
    assert!(out.status.success());
    let sys: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/set_system.json")).unwrap()).unwrap();
    assert_eq!(sys["sets"].as_array().unwrap().len(), 28);
    assert_eq!(sys["universe"], 30);
    let a1: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/a1_rectangles.json")).unwrap()).unwrap();
    assert_eq!(a1["regions"].as_array().unwrap().len(), 28);

    let tri = path(dir.path(), "tri.dimacs");
    std::fs::write(&tri, "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
    let out = discset(&["reduce", "--graph", &tri, "--out-dir", &out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "not_cubic");
}

#[test]
fn bench_rows_and_determinism() {
    let args = [
        "bench", "--count", "50", "--seed", "1000", "--m", "7", "--n", "20", "--t", "1,2,3", "--omit-timing",
    ];
    let first = discset(&args);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance_id,problem,shape,m,n,t,ls_size,exact_size,ratio,exchanges,elapsed_ms")
    );
    assert_eq!(lines.count(), 150);
    assert_eq!(discset(&args).stdout, first.stdout);
}
