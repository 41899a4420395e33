mod support;

use std::path::Path;

use serde_json::Value as Json;
use support::corpus::{btt, dir};

fn code(args: &[&str]) -> i32 {
    btt(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    let out = btt(args);
    assert!(out.status.success(), "btt {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const FIXTURES: &str = "crates/cli/tests/fixtures";

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["check", &fixture("empty.btt")]), 0);
    assert_eq!(code(&["check", "corpus/sequents.btt"]), 0);
    assert_eq!(code(&["check", &fixture("mismatch.btt")]), 1);
    assert_eq!(code(&["check", &fixture("unparsable.btt")]), 2);
    assert_eq!(code(&["check", "corpus/no-such-file.btt"]), 2);
    assert_eq!(code(&["--budget", "10", "iso", "corpus/big.bttm"]), 2);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["iso", "--no-such-flag"]), 64);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn mismatch_names_the_reason() {
    let out = btt(&["check", &fixture("mismatch.btt")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("EqualityAcrossSorts"));
}

#[test]
fn budget_error_names_the_carrier_sizes() {
    let out = btt(&["--budget", "10", "iso", "corpus/big.bttm"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[4]") && err.contains("24"), "{err}");
}

#[test]
fn budget_from_the_environment() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_btt"))
        .args(["iso", "corpus/big.bttm"])
        .env("BTT_BUDGET", "10")
        .current_dir(dir().join(".."))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&["--budget", "24", "iso", "corpus/big.bttm"]).lines().next(), Some("isomorphic: true"));
}

const INVOCATIONS: &[(&str, &[&str])] = &[
    ("check.json", &["check", "corpus/sequents.btt", "corpus/group.btt"]),
    ("check.json", &["check", "crates/cli/tests/fixtures/mismatch.btt"]),
    ("value.json", &["eval", "N =[Group]= N'", "corpus/group.btt", "--model", "corpus/z3.bttm"]),
    ("sa-normalize.json", &["sa-normalize", "corpus/group.btt"]),
    ("sa-normalize.json", &["sa-normalize", "corpus/actions.btt", "--class", "Labelled"]),
    ("simplify.json", &["simplify", "corpus/signatures.btt", "--class", "Chooser"]),
    ("iso.json", &["iso", "corpus/graph.btt", "--model", "corpus/graphs.bttm"]),
    ("iso.json", &["iso", "corpus/group.btt", "--class", "Magma", "--model", "corpus/magma.bttm"]),
    ("value.json", &["transport", "corpus/graph.btt", "--model", "corpus/graphs.bttm"]),
    ("j.json", &["jprime", "corpus/group.btt", "--class", "Group", "--model", "corpus/z2.bttm", "--tau", "Carrier"]),
    (
        "j.json",
        &["j", "corpus/group.btt", "--class", "Group", "--model", "corpus/z2.bttm", "--tau", "Carrier", "--delta", "unit"],
    ),
];

fn validator(schema: &str) -> jsonschema::Validator {
    let path = dir().join("../schemas").join(schema);
    let schema: Json = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(schema: &str, doc: &Json) {
    let v = validator(schema);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}\n{doc}");
}

#[test]
fn json_output_validates() {
    for (schema, args) in INVOCATIONS {
        let out = btt(&[&["--format", "json"], *args].concat());
        let doc: Json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_valid(schema, &doc);
    }
}

#[test]
fn json_errors_validate() {
    for args in [
        &["--format", "json", "--budget", "10", "iso", "corpus/big.bttm"][..],
        &["--format", "json", "check", "corpus/no-such-file.btt"],
        &["--format", "json", "eval", "nope", "corpus/group.btt"],
    ] {
        let out = btt(args);
        let doc: Json = serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_valid("error.json", &doc);
        assert_eq!(doc["exitCode"].as_i64(), out.status.code().map(i64::from));
    }
}

#[test]
fn output_is_deterministic() {
    for (_, args) in INVOCATIONS {
        for format in ["text", "json"] {
            let full = [&["--format", format], *args].concat();
            let first = btt(&full);
            let second = btt(&full);
            assert_eq!(first.stdout, second.stdout, "{full:?}");
            assert_eq!(first.status.code(), second.status.code());
        }
    }
}

#[test]
fn iso_witnesses_are_sorted_and_include_identity() {
    let doc: Json = serde_json::from_str(&stdout(&["--format", "json", "iso", "corpus/graph.btt", "--model", "corpus/edgeless.bttm"])).unwrap();
    assert_eq!(doc["witnessCount"], 2);
    let witnesses = doc["witnesses"].as_array().unwrap();
    let keys: Vec<String> = witnesses.iter().map(|w| w.to_string()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);

    let same = stdout(&["--format", "json", "iso", "corpus/graph.btt", "--model", "corpus/graphs.bttm", "--right", "N"]);
    let doc: Json = serde_json::from_str(&same).unwrap();
    let identity = serde_json::json!([[["atom a0", "atom a0"], ["atom a1", "atom a1"]]]);
    assert!(doc["witnesses"].as_array().unwrap().contains(&identity), "{doc}");
}

#[test]
fn sa_normalize_golden() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sa-normalize-group.txt");
    let want = std::fs::read_to_string(golden).unwrap();
    assert_eq!(stdout(&["sa-normalize", "corpus/group.btt", "--class", "Group"]), want);
}
