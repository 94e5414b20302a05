use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

use cw_cli::document::module_document;
use cw_core::module::{make_v_ab, make_v_ab_seq};
use cw_core::{parse, MultiPoly, Window};

fn cwconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwconf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn doc(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn check_algebra_builtin_passes() {
    let o = cwconf(&["check-algebra", "--builtin", "cw", "--window", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("169 skew pairs, 2197 Jacobi triples"));
}

#[test]
fn classify_rank1_lists_both_classes() {
    let o = cwconf(&["classify-rank1", "--deg-bound", "6", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    let kinds: Vec<&str> = r["descriptors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["Trivial", "RankOne"]);
}

#[test]
fn fourier_prints_the_bracket() {
    let o = cwconf(&["fourier", "--i", "1", "--j", "2", "--alpha-band", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("(-d - 2*l) L_3"));
    let o = cwconf(&["fourier", "--i", "-2", "--j", "-1"]);
    assert_eq!(stdout(&o).lines().next(), Some("(-d - 2*l) L_-3"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cwconf(&["fourier", "--i", "1"]).status.code(), Some(2));
    assert_eq!(cwconf(&["check-algebra", "--window", "-1"]).status.code(), Some(2));
    assert_eq!(cwconf(&["check-algebra", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(cwconf(&["classify-graded"]).status.code(), Some(2));
    let o = cwconf(&["check-derivation", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
}

#[test]
fn internal_errors_exit_three() {
    assert_eq!(cwconf(&["fourier", "--i", "3", "--j", "3", "--alpha-band", "0"]).status.code(), Some(3));
}

#[test]
fn malformed_documents_are_rejected() {
    let f = doc(r#"{"module": {"rank_one": true, "entries": {"0": "-d + (l"}}}"#);
    let o = cwconf(&["check-module", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 7"), "{}", stderr(&o));

    let f = doc(r#"{"module": {"rank_one": true, "entries": {"-1": "d", "1": "d"}}}"#);
    let o = cwconf(&["check-module", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gap"));
}

#[test]
fn failing_module_reports_parseable_witnesses() {
    let v = make_v_ab(&MultiPoly::int(1), &MultiPoly::int(2), Window::symmetric(2));
    let bad = v.with_override(0, 0, parse("-d + l + 3").unwrap());
    let f = doc(&module_document(&bad, Window::symmetric(2)));
    let path = f.path().to_str().unwrap();

    let o = cwconf(&["check-module", "--input", path]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let witnesses: Vec<&str> = text
        .lines()
        .filter_map(|l| l.split_once("hs: ").map(|(_, p)| p))
        .collect();
    assert!(!witnesses.is_empty());
    for w in witnesses {
        parse(w).unwrap_or_else(|e| panic!("{w}: {e}"));
    }

    let good = doc(&module_document(&v, Window::symmetric(2)));
    assert_eq!(cwconf(&["check-module", "--input", good.path().to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn classify_graded_from_document() {
    let seq: BTreeMap<i64, i64> = (-2..=2).map(|k| (k, if k < 0 { -1 } else { 0 })).collect();
    let v = make_v_ab_seq(&seq, &MultiPoly::int(3)).unwrap();
    let f = doc(&module_document(&v, Window::symmetric(2)));
    let o = cwconf(&["classify-graded", "--input", f.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = json(&o);
    let d = &r["descriptors"][0];
    assert_eq!(d["kind"], "GradedSequence");
    assert_eq!(d["b"], "3");
    assert_eq!(d["a"]["-1"], -1);
    assert_eq!(d["a"]["1"], 0);
}

#[test]
fn inner_derivation_document() {
    // ad(∂L_1): [∂L_1 λ L_i] = −λ(−∂−2λ) L_{i+1}.
    let mut entries = Vec::new();
    for i in -3..=3 {
        entries.push(format!("\"{i},{}\": \"l*d + 2*l^2\"", i + 1));
    }
    let f = doc(&format!("{{\"derivation\": {{\"name\": \"D\", \"entries\": {{{}}}}}}}", entries.join(", ")));
    let o = cwconf(&["check-derivation", "--input", f.path().to_str().unwrap(), "--window", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("D = ad(("), "{}", stdout(&o));

    let f = doc(r#"{"derivation": {"entries": {"-1,-1": "1", "0,0": "1", "1,1": "1"}}}"#);
    let o = cwconf(&["check-derivation", "--input", f.path().to_str().unwrap(), "--window", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn algebra_document_mutant_fails() {
    let f = doc(r#"{"algebra": {"name": "mutant", "default": "-d - 3*l"}}"#);
    let o = cwconf(&["check-algebra", "--input", f.path().to_str().unwrap(), "--window", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let f = doc(r#"{"algebra": {"default": "-d - 2*l"}}"#);
    let path = f.path().to_str().unwrap();
    assert_eq!(cwconf(&["check-algebra", "--input", path, "--window", "2"]).status.code(), Some(0));
    assert_eq!(cwconf(&["check-algebra", "--input", path, "--builtin", "cw"]).status.code(), Some(2));
}

#[test]
fn json_reports_are_stable_and_sorted() {
    let args = ["check-derivation", "--format", "json", "--seed", "7", "--window", "2", "--deg-bound", "3"];
    let strip = |o: &Output| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("elapsed_ms");
        v
    };
    let (a, b) = (cwconf(&args), cwconf(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(json(&a)["schema_version"], 1);

    let r = json(&cwconf(&["check-algebra", "--format", "json", "--window", "1"]));
    let ids: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(r["coverage"]["checked"], 9 + 27);
}

#[test]
fn mutate_test_catches_everything() {
    let o = cwconf(&["mutate-test", "--window", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("63/63 mutants detected"));
}

#[test]
fn symbolic_rank_one_document_checks() {
    let f = doc(r#"{"module": {"rank_one": true, "entries": {"-1": "cinv*(-d + a*l + b)", "0": "-d + a*l + b", "1": "c*(-d + a*l + b)"}}}"#);
    let o = cwconf(&["check-module", "--input", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
