use std::process::{Command, Output};

use serde_json::Value;

const DINF: &str = r#"{"kind":"infinite-dihedral"}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodone"))
        .args(args)
        .env("PRODONE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn is_one_rejects_unbalanced_sequence() {
    let r = json(&["is-one", DINF, "a^2, a^6, t^[2]"]);
    assert_eq!(r["results"]["product_one"], false);
    assert_eq!(r["results"]["certificate"]["kind"], "exact");
}

#[test]
fn is_one_witness_is_an_ordering_of_the_terms() {
    let r = json(&["is-one", DINF, "a^-3, a^2, a^5*t, t", "--witness"]);
    assert_eq!(r["results"]["product_one"], true);
    let mut ordering: Vec<String> = serde_json::from_value(r["results"]["ordering"].clone()).unwrap();
    ordering.sort();
    assert_eq!(ordering, ["a^-3", "a^2", "a^5*t", "t"]);
}

#[test]
fn classify_mixed_signs_with_one_reflection() {
    let r = json(&["dihedral", "classify", "a, a^-1, t"]);
    let res = &r["results"];
    assert_eq!(res["weakly_krull"], true);
    assert_eq!(res["locally_tame"], false);
    assert_eq!(res["tame"], false);
    assert_eq!(res["finitely_generated"], false);
    assert!(res["certificates"]["weakly_krull"].is_object());
}

#[test]
fn group_document_from_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("c4.json");
    std::fs::write(&path, r#"{"kind":"cyclic","n":4}"#).unwrap();
    let r = json(&["davenport", path.to_str().unwrap(), "g, g^2, g^3"]);
    assert_eq!(r["results"]["davenport"]["kind"], "exact");
    assert_eq!(r["results"]["davenport"]["value"], 4);
}

#[test]
fn cayley_table_group_inline() {
    let c3 = r#"{"kind":"finite-cayley","elements":["e","x","y"],"table":[[0,1,2],[1,2,0],[2,0,1]],"identity":0}"#;
    let r = json(&["pi", c3, "x, x", "--oracle"]);
    assert_eq!(r["results"]["product_set"], serde_json::json!(["y"]));
    assert_eq!(r["results"]["oracle"]["agrees_with_dp"], true);
}

#[test]
fn atoms_and_factorizations() {
    let r = json(&["dihedral", "atoms", "a, t", "--max-len", "8", "--closed-form"]);
    assert_eq!(r["results"]["count"], 4);
    assert_eq!(r["results"]["certificate"]["kind"], "complete_up_to_length");
    let enumerated = json(&["dihedral", "atoms", "a, t", "--max-len", "8"]);
    assert_eq!(r["results"]["atoms"], enumerated["results"]["atoms"]);

    let r = json(&["factorize", DINF, "a, a^-1, t", "t^[4], a^[4], a^-1^[4]"]);
    assert_eq!(r["results"]["lengths"], serde_json::json!([2, 4, 6]));
}

#[test]
fn seminormality_probe_reports_counterexample() {
    let r = json(&["probe", "seminormal", DINF, "a^2, a^6, t", "--bound", "8"]);
    let c = &r["results"]["counterexample"];
    assert_eq!(c["quotient"], "a^2, a^6, t^[2]");
    assert_eq!(c["powers_product_one"], serde_json::json!([2, 3]));
}

#[test]
fn invariants_carry_bound_tags() {
    let r = json(&[
        "invariants",
        r#"{"kind":"cyclic","n":3}"#,
        "g, g^2",
        "--max-size",
        "9",
        "--max-k",
        "3",
    ]);
    assert_eq!(r["results"]["certificate"]["kind"], "exact_within_bound");
    assert_eq!(r["results"]["delta"], serde_json::json!([1]));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "invariants",
        r#"{"kind":"elementary-2","r":2}"#,
        "e, b1, b2, b1*b2",
        "--max-size",
        "6",
        "--max-k",
        "3",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["is-one", DINF, "b^2"]).status.code(), Some(2));
    assert_eq!(run(&["is-one", "{\"kind\":\"nope\"}", "e"]).status.code(), Some(2));
    let budget = run(&["pi", DINF, "a^[9], t", "--oracle"]);
    assert_eq!(budget.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&budget.stderr).contains("budget"));
}

#[test]
fn verify_davenport_suite_passes() {
    let r = json(&["verify", "--suite", "davenport"]);
    assert_eq!(r["results"]["passed"], true);
    assert_eq!(r["results"]["criteria"].as_array().unwrap().len(), 2);
}
