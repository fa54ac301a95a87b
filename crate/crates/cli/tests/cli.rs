//! End-to-end checks of the command-line interface.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbnets"))
}

fn tmpfile(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn asia() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../nets/asia.json").to_string()
}

fn asia_query() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../nets/asia_query.json").to_string()
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn parse_posterior(text: &str) -> BTreeMap<String, f64> {
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn exact_on_single_node_net() {
    let net = tmpfile(
        "single.json",
        r#"{"nodes":[{"name":"x","cardinality":2,"parents":[],"cpt":[0.7,0.3]}]}"#,
    );
    let query = tmpfile("single_q.json", r#"{"hypotheses":["x"]}"#);
    let out = bin()
        .args(["exact", "--net"])
        .arg(&net)
        .arg("--query")
        .arg(&query)
        .output()
        .unwrap();
    assert_eq!(stdout_of(&out).trim(), r#"{"0":0.7,"1":0.3}"#);
}

#[test]
fn lws_sampling_tracks_exact() {
    let exact = parse_posterior(&stdout_of(
        &bin()
            .args(["exact", "--net", &asia(), "--query", &asia_query()])
            .output()
            .unwrap(),
    ));
    let est = parse_posterior(&stdout_of(
        &bin()
            .args([
                "sample", "--net", &asia(), "--query", &asia_query(), "--method", "lws",
                "--samples", "200000", "--seed", "1",
            ])
            .output()
            .unwrap(),
    ));
    for (key, p) in &exact {
        assert!((est[key] - p).abs() <= 0.02, "{key}: {} vs {p}", est[key]);
    }
}

#[test]
fn compile_gibbs_three_node_header_is_ten_qubits() {
    let net = tmpfile(
        "dense3.json",
        r#"{"nodes":[
            {"name":"a","cardinality":2,"parents":[],"cpt":[0.3,0.7]},
            {"name":"b","cardinality":2,"parents":["a"],"cpt":[0.9,0.1,0.4,0.6]},
            {"name":"c","cardinality":2,"parents":["a","b"],"cpt":[0.2,0.8,0.6,0.4,0.25,0.75,0.5,0.5]}
        ]}"#,
    );
    let out = bin()
        .args(["compile", "--gibbs", "--beta", "2", "--net"])
        .arg(&net)
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "QUBITS 10");
}

#[test]
fn compile_plain_embedding_and_map() {
    let out = bin()
        .args(["compile", "--net", &asia()])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "QUBITS 8");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("qubit map:"), "{stderr}");
}

#[test]
fn embed_cpt_command() {
    let cpt = tmpfile(
        "cpt.json",
        r#"{"cardinality":2,"parent_cardinalities":[2,2],"entries":[0.3,0.7,0.9,0.1,0.5,0.5,0.2,0.8]}"#,
    );
    let out = bin().args(["embed", "--cpt"]).arg(&cpt).output().unwrap();
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "QUBITS 3");
    assert!(text.contains("MUXROTY t2 c0 c1 |"), "{text}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    for method in ["lws", "gibbs", "mh", "q-is", "q-gibbs", "q-mh"] {
        let run = || {
            bin()
                .args([
                    "sample", "--net", &asia(), "--query", &asia_query(), "--method", method,
                    "--samples", "5000", "--seed", "42",
                ])
                .output()
                .unwrap()
        };
        let a = run();
        let b = run();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "method {method}");
    }
}

#[test]
fn chains_split_and_merge_deterministically() {
    let run = || {
        bin()
            .args([
                "sample", "--net", &asia(), "--query", &asia_query(), "--method", "lws",
                "--samples", "40000", "--seed", "3", "--chains", "4",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.stdout, b.stdout);
    let est = parse_posterior(&stdout_of(&a));
    let total: f64 = est.values().sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn parse_errors_exit_two() {
    let out = bin()
        .args(["exact", "--net", "/nonexistent.json", "--query", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let bad = tmpfile("bad.json", r#"{"nodes": [{"name":"x"}]}"#);
    let query = tmpfile("bad_q.json", r#"{"hypotheses":[]}"#);
    let out = bin()
        .args(["exact", "--net"])
        .arg(&bad)
        .arg("--query")
        .arg(&query)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qubit_cap_override_is_honored() {
    // A tight cap turns the Asia embedding into a width error (exit 3); the
    // env override restores it.
    let out = bin()
        .args(["compile", "--net", &asia()])
        .env("QBN_MAX_QUBITS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .args(["compile", "--net", &asia()])
        .env("QBN_MAX_QUBITS", "16")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn numeric_errors_exit_three() {
    let net = tmpfile(
        "impossible.json",
        r#"{"nodes":[{"name":"a","cardinality":2,"parents":[],"cpt":[1.0,0.0]}]}"#,
    );
    let query = tmpfile("impossible_q.json", r#"{"evidence":{"a":1},"hypotheses":[]}"#);
    let out = bin()
        .args(["exact", "--net"])
        .arg(&net)
        .arg("--query")
        .arg(&query)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = bin()
        .args(["sample", "--method", "rs", "--samples", "100", "--net"])
        .arg(&net)
        .arg("--query")
        .arg(&query)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
