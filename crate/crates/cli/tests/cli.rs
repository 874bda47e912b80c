use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn relwl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relwl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn cycle_pair_fools_relational_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    let out = relwl(&[
        "gen",
        "--family",
        "cycle-pair",
        "-r",
        "2",
        "--out-a",
        p(&a),
        "--out-b",
        p(&b),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("a.labels.tsv").exists());

    let out = relwl(&[
        "wl",
        "compare",
        "--graph-a",
        p(&a),
        "--graph-b",
        p(&b),
        "--variant",
        "1rwl",
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["distinguished"], false);

    let out = relwl(&[
        "wl",
        "compare",
        "--graph-a",
        p(&a),
        "--graph-b",
        p(&b),
        "--variant",
        "krlwl",
        "-k",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["distinguished"], true);
}

#[test]
fn wl_run_reports_stable_classes() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.tsv");
    assert!(relwl(&["gen", "--family", "prop3", "--out-a", p(&g)])
        .status
        .success());
    let full = json(&relwl(&[
        "wl",
        "run",
        "--graph",
        p(&g),
        "--variant",
        "1rwl",
    ]));
    let weak = json(&relwl(&[
        "wl",
        "run",
        "--graph",
        p(&g),
        "--variant",
        "weak",
    ]));
    assert!(full["class_count"].as_u64() > weak["class_count"].as_u64());
    assert_eq!(full["colors"].as_array().unwrap().len(), 4);
}

#[test]
fn random_graph_and_permuted_copy_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    let out = relwl(&[
        "gen",
        "--family",
        "random",
        "--seed",
        "7",
        "--permute-seed",
        "3",
        "--out-a",
        p(&a),
        "--out-b",
        p(&b),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = relwl(&[
        "wl",
        "compare",
        "--graph-a",
        p(&a),
        "--graph-b",
        p(&b),
        "--numeric-labels",
        "--variant",
        "1rwl",
    ]);
    assert_eq!(json(&out)["distinguished"], false);
}

#[test]
fn gnn_forward_writes_features() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.tsv");
    assert!(relwl(&["gen", "--family", "prop3", "--out-a", p(&g)])
        .status
        .success());
    for arch in ["rgcn", "compgcn"] {
        let out = relwl(&[
            "gnn",
            "forward",
            "--graph",
            p(&g),
            "--arch",
            arch,
            "--layers",
            "2",
            "--width",
            "8",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = json(&out);
        assert_eq!(v["readout"].as_array().unwrap().len(), 8);
    }
    let a = relwl(&[
        "gnn",
        "forward",
        "--graph",
        p(&g),
        "--arch",
        "rgcn",
        "--seed",
        "4",
    ]);
    let b = relwl(&[
        "gnn",
        "forward",
        "--graph",
        p(&g),
        "--arch",
        "rgcn",
        "--seed",
        "4",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_suite_and_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("v.json");
    let out = relwl(&["verify", "--suite", "prop3", "--out", p(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["suite"], "prop3");
    assert_eq!(v["pass"], true);
    assert_eq!(v["schema"], 1);

    let g = dir.path().join("g.tsv");
    assert!(relwl(&["gen", "--family", "prop3", "--out-a", p(&g)])
        .status
        .success());
    let out = relwl(&[
        "verify",
        "consistency",
        "--graph",
        p(&g),
        "--pair",
        "1rwl:rgcn",
        "--seeds",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn refusals_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cap.json");
    std::fs::write(&config, r#"{"tuple_cap": 10}"#).unwrap();
    let out = relwl(&["verify", "--suite", "prop9", "--config", p(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["pass"], false);

    let out = relwl(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.tsv");
    let out = relwl(&["wl", "run", "--graph", p(&missing), "--variant", "1wl"]);
    assert_eq!(out.status.code(), Some(2));
}
