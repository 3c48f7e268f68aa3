use std::path::{Path, PathBuf};

use serde_json::Value;
use shiftproj::cli::{run_from_args, EXIT_CHECK_FAILED, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String) {
    run_from_args(std::iter::once("shiftproj").chain(args.iter().copied()))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &str) -> Value {
    serde_json::from_str(out).unwrap_or_else(|e| panic!("{e}: {out}"))
}

#[test]
fn verify_default_passes_all_sections() {
    let (code, out) = run(&["verify", "--format", "json", "--no-timestamp"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let v = json(&out);
    let sections = v["sections"].as_array().unwrap();
    assert_eq!(sections.len(), 5);
    assert!(sections.iter().all(|s| s["pass"] == true));
    assert!(v.get("generated_at_unix").is_none());
}

#[test]
fn verify_small_run_and_negative_control() {
    let (code, out) = run(&["verify", "--trials", "1", "--seed", "0"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(run(&["verify", "--tol", "1e-30"]).0, EXIT_CHECK_FAILED);
    assert_eq!(run(&["verify", "--trials", "x"]).0, EXIT_USAGE);
}

#[test]
fn timestamp_is_opt_out() {
    let (_, out) = run(&["verify", "--trials", "1", "--format", "json"]);
    assert!(json(&out)["generated_at_unix"].as_u64().is_some());
}

#[test]
fn design_path_consensus_and_simulate() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "p4.json",
        r#"{"n": 4, "topology": {"kind": "path"}, "basis": {"kind": "consensus"}}"#,
    );
    let out_path = dir.path().join("design.json");
    let (code, msg) = run(&[
        "design",
        s(&scenario),
        "--format",
        "json",
        "--out",
        s(&out_path),
        "--no-timestamp",
    ]);
    assert_eq!(code, EXIT_OK, "{msg}");
    let design = json(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(design["status"], "feasible");
    assert!(design["design"]["order"].as_u64().unwrap() <= 4);
    assert_eq!(design["design"]["shift"].as_array().unwrap().len(), 4);
    assert_eq!(
        design["design"]["grouping"]["labels"]
            .as_array()
            .unwrap()
            .len(),
        4
    );

    for extra in [vec![], vec!["--design", s(&out_path)]] {
        let mut args = vec![
            "simulate",
            s(&scenario),
            "--signal",
            "1,2,3,4",
            "--format",
            "json",
            "--no-timestamp",
        ];
        args.extend(extra);
        let (code, out) = run(&args);
        assert_eq!(code, EXIT_OK, "{out}");
        let v = json(&out);
        for y in v["y"].as_array().unwrap() {
            assert!((y.as_f64().unwrap() - 2.5).abs() < 1e-9);
        }
        let stats = &v["stats"];
        assert_eq!(
            stats["rounds"].as_u64().unwrap() + 1,
            v["order"].as_u64().unwrap()
        );
    }
}

#[test]
fn empty_graph_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "e4.json",
        r#"{"n": 4, "topology": {"kind": "empty"}, "basis": {"kind": "consensus"}}"#,
    );
    let (code, out) = run(&["design", s(&scenario), "--format", "json"]);
    assert_eq!(code, EXIT_INFEASIBLE);
    let v = json(&out);
    assert_eq!(v["status"], "infeasible");
    assert!(["grouping-failed", "only-zero"].contains(&v["reason"].as_str().unwrap()));
    assert_eq!(run(&["simulate", s(&scenario)]).0, EXIT_INFEASIBLE);
}

#[test]
fn complete_graph_random_basis() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "c4.json",
        r#"{"n": 4, "topology": {"kind": "complete"}, "basis": {"kind": "random", "r": 2, "seed": 1}}"#,
    );
    assert_eq!(run(&["design", s(&scenario)]).0, EXIT_OK);
}

#[test]
fn identity_filter_sends_no_messages() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "full.json",
        r#"{"n": 3, "topology": {"kind": "path"}, "basis": {"kind": "explicit", "columns": [[1,0,0],[0,1,0],[0,0,1]]}}"#,
    );
    let (code, out) = run(&[
        "simulate",
        s(&scenario),
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let v = json(&out);
    assert_eq!(v["order"], 1);
    assert_eq!(v["stats"]["messages"], 0);
}

#[test]
fn ring_with_seeded_signal() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "r6.json",
        r#"{"n": 6, "topology": {"kind": "ring"}, "basis": {"kind": "consensus"}}"#,
    );
    let (code, out) = run(&[
        "simulate",
        s(&scenario),
        "--seed",
        "3",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let v = json(&out);
    let y_c: Vec<f64> = v["y_central"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let scale = 1.0 + y_c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(v["max_abs_diff"].as_f64().unwrap() < 1e-9 * scale);
}

#[test]
fn hand_written_design_with_foreign_entry_is_refused() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "p3.json",
        r#"{"n": 3, "topology": {"kind": "path"}, "basis": {"kind": "consensus"}}"#,
    );
    let design = write(
        &dir,
        "d.json",
        r#"{"design": {"shift": [[1,0,0.5],[0,1,0],[0.5,0,1]], "coeffs": [0, 1]}}"#,
    );
    let (code, out) = run(&[
        "simulate",
        s(&scenario),
        "--design",
        s(&design),
        "--signal",
        "1,1,1",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.contains("(0, 2)") || out.contains("row 0"), "{out}");
}

#[test]
fn schema_errors_exit_2_with_field_path() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            r#"{"n": 4, "topology": {"kind": "path"}, "basis": {"kind": "consensus"}, "options": {"max_retries": -1}}"#,
            "options.max_retries",
        ),
        (
            r#"{"n": 4, "topology": {"kind": "star"}, "basis": {"kind": "consensus"}}"#,
            "topology",
        ),
        (
            r#"{"n": 4, "topology": {"kind": "edges", "edges": [[0, 4]]}, "basis": {"kind": "consensus"}}"#,
            "topology.edges[0]",
        ),
        (r#"{"n": 4, "topology": {"kind": "path"}}"#, "basis"),
        (
            r#"{"n": 4, "topology": {"kind": "path"}, "basis": {"kind": "random", "r": 5, "seed": 0}}"#,
            "basis.r",
        ),
        ("not json", "."),
    ];
    for (k, (body, path)) in cases.iter().enumerate() {
        let scenario = write(&dir, &format!("bad{k}.json"), body);
        let (code, out) = run(&["design", s(&scenario)]);
        assert_eq!(code, EXIT_USAGE, "case {k}: {out}");
        assert!(out.contains(path), "case {k}: expected {path} in {out}");
    }
    assert_eq!(run(&["design", "/nonexistent/scenario.json"]).0, EXIT_USAGE);
    let scenario = write(
        &dir,
        "ok.json",
        r#"{"n": 4, "topology": {"kind": "path"}, "basis": {"kind": "consensus"}}"#,
    );
    assert_eq!(
        run(&["simulate", s(&scenario), "--signal", "1,2"]).0,
        EXIT_USAGE
    );
}

#[test]
fn rank_demo_examples() {
    let (code, out) = run(&[
        "rank-demo",
        "--n",
        "4",
        "--m",
        "10",
        "--trials",
        "100",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let row = &json(&out)["rows"][0];
    assert_eq!(row["max_rank"], 4);
    assert_eq!(row["n2"], 6);
    assert_eq!(row["vacuous"], true);

    let (_, out) = run(&["rank-demo", "--n", "3", "--format", "json"]);
    let row = &json(&out)["rows"][0];
    assert_eq!(row["n2"], 3);
    assert_eq!(row["boundary"], true);
    assert_eq!(row["vacuous"], false);
    let (_, text) = run(&["rank-demo", "--n", "3"]);
    assert!(text.contains("boundary"));

    let (_, out) = run(&["rank-demo", "--n", "1", "--m", "5", "--format", "json"]);
    assert_eq!(json(&out)["rows"][0]["max_rank"], 1);

    for bad in ["8-3", "0", "abc"] {
        assert_eq!(run(&["rank-demo", "--n", bad]).0, EXIT_USAGE);
    }
}

#[test]
fn commands_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let scenario = write(
        &dir,
        "rnd.json",
        r#"{"n": 7, "topology": {"kind": "random", "p": 0.3, "seed": 5}, "basis": {"kind": "consensus"}, "options": {"seed": 9}}"#,
    );
    for args in [
        vec!["design", s(&scenario), "--format", "json", "--no-timestamp"],
        vec![
            "simulate",
            s(&scenario),
            "--format",
            "json",
            "--no-timestamp",
        ],
        vec![
            "rank-demo",
            "--n",
            "3-5",
            "--trials",
            "10",
            "--format",
            "json",
            "--no-timestamp",
        ],
    ] {
        assert_eq!(run(&args), run(&args));
    }
}
