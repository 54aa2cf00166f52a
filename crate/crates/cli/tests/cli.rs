use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use thincoalg_cli::RunReport;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, instance: &Value, what: &str) {
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{what}: {errors:?}");
}

fn thincoalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thincoalg"))
        .args(args)
        .env_remove("THINCOALG_ARITY_CAP")
        .output()
        .unwrap()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = thincoalg(args);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, stdout, _) = run(&full);
    let value: Value = serde_json::from_str(&stdout).unwrap();
    assert_valid(&schema("report.schema.json"), &value, &args.join(" "));
    (code, value)
}

#[test]
fn check_thin_exit_codes() {
    assert_eq!(run(&["check-thin", &f("server.coalg.json")]).0, 0);
    assert_eq!(run(&["check-thin", &f("two_loops.coalg.json")]).0, 0);
    let (code, out, _) = run(&["check-thin", &f("bag_loop.coalg.json")]);
    assert_eq!(code, 1);
    assert!(
        out.contains("cycle1: 0 0 0") && out.contains("cycle2: 0 1 0"),
        "{out}"
    );
    assert_eq!(run(&["check-thin", &f("binary_tree.coalg.json")]).0, 1);
    assert_eq!(run(&["check-thin", &f("bag_tree.coalg.json")]).0, 1);
}

#[test]
fn expect_and_oracle_flags() {
    assert_eq!(
        run(&[
            "check-thin",
            &f("bag_loop.coalg.json"),
            "--expect",
            "nonthin"
        ])
        .0,
        0
    );
    assert_eq!(
        run(&["check-thin", &f("bag_loop.coalg.json"), "--expect", "thin"]).0,
        1
    );
    assert_eq!(
        run(&[
            "check-thin",
            &f("server.coalg.json"),
            "--expect",
            "thin",
            "--oracle"
        ])
        .0,
        0
    );
    assert_eq!(
        run(&["check-thin", &f("server.coalg.json"), "--expect", "nonthin"]).0,
        1
    );
    let (code, v) = report(&["check-thin", &f("bag_tree.coalg.json"), "--oracle"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["oracle_thin"], Value::Bool(false));
}

#[test]
fn input_errors_are_distinct_and_exit_two() {
    let cases = [
        ("malformed.coalg.json", "malformed JSON"),
        ("unknown_op.coalg.json", "unknown operation"),
        ("out_of_range.coalg.json", "only 2 states"),
        ("cap.coalg.json", "cap"),
    ];
    let mut messages = Vec::new();
    for (file, needle) in cases {
        let (code, _, err) = run(&["check-thin", &f(file)]);
        assert_eq!(code, 2, "{file}");
        assert!(err.contains(needle), "{file}: {err}");
        messages.push(err);
    }
    messages.sort();
    messages.dedup();
    assert_eq!(messages.len(), cases.len());
    assert_eq!(run(&["check-thin", "/nonexistent/x.json"]).0, 2);
    assert_eq!(run(&["check-thin"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(
        run(&["check-thin", &f("server.coalg.json"), "--root", "7"]).0,
        2
    );
    assert_eq!(run(&["check-thin", &f("uomega.term.json")]).0, 2);
}

#[test]
fn arity_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_thincoalg"))
        .args(["check-thin", &f("cap.coalg.json")])
        .env("THINCOALG_ARITY_CAP", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_thincoalg"))
        .args(["check-thin", &f("server.coalg.json")])
        .env("THINCOALG_ARITY_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn term_commands() {
    let (code, out, _) = run(&["rank", &f("uomega.term.json")]);
    assert_eq!((code, out.trim()), (0, "(1,0)"));
    let (code, out, _) = run(&["encode", &f("uomega.term.json"), "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().collect::<Vec<_>>(), vec!["ε", "0", "00", "000"]);
    let (_, dom, _) = run(&["encode", &f("comb.term.json"), "--depth", "5", "--dom"]);
    let (_, enc, _) = run(&["encode", &f("comb.term.json"), "--depth", "5"]);
    assert_eq!(dom, enc);
    assert_eq!(run(&["encode", &f("server.term.json")]).0, 2);

    assert_eq!(
        run(&["eq", &f("uomega.term.json"), &f("uomega.term.json")]).0,
        0
    );
    assert_eq!(
        run(&["eq", &f("uomega.term.json"), &f("uuomega.term.json")]).0,
        0
    );
    assert_eq!(
        run(&["eq", &f("unrolled.term.json"), &f("comb.term.json")]).0,
        0
    );
    assert_eq!(
        run(&["eq", &f("uomega.term.json"), &f("comb.term.json")]).0,
        1
    );
    assert_eq!(
        run(&["eq", &f("bag_loop.coalg.json"), &f("bag_tree.coalg.json")]).0,
        0
    );
    assert_eq!(
        run(&["eq", &f("server.coalg.json"), &f("comb.term.json")]).0,
        2
    );

    let (code, out, _) = run(&["normalize", &f("unrolled.term.json"), "--oracle"]);
    assert_eq!(code, 0);
    assert!(
        out.starts_with("(b(a, _))^ω") && out.contains("agrees"),
        "{out}"
    );
    let (_, v) = report(&["normalize", &f("uuomega.term.json")]);
    assert_eq!(v["result"]["rank"]["major"], 1);
    assert_eq!(v["result"]["rank"]["minor"], 0);
}

#[test]
fn coalgebra_commands() {
    let (code, out, _) = run(&["paths", &f("server.coalg.json"), "--depth", "1"]);
    assert_eq!(code, 0);
    assert!(
        out.contains("paths of length 1: 3") && out.contains("countably-infinite"),
        "{out}"
    );
    let (_, v) = report(&["paths", &f("bag_loop.coalg.json"), "--depth", "2"]);
    assert_eq!(v["result"]["count"], "4");
    assert_eq!(v["result"]["infinite"]["class"], "uncountable");

    assert_eq!(run(&["rank", &f("two_loops.coalg.json")]).1.trim(), "(2,0)");
    assert_eq!(run(&["cb-rank", &f("two_loops.coalg.json")]).1.trim(), "2");
    assert_eq!(run(&["cb-rank", &f("comb.term.json")]).1.trim(), "1");
    let (code, out, _) = run(&["rank", &f("bag_loop.coalg.json")]);
    assert_eq!(code, 1);
    assert!(out.contains("witness"), "{out}");
    assert_eq!(run(&["cb-rank", &f("binary_tree.coalg.json")]).0, 1);
    assert_eq!(run(&["cb-rank", &f("server.coalg.json")]).0, 2);
}

#[test]
fn unfold_output_is_a_valid_coalgebra() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["unfold", &f("server.term.json"), "--minimize"]);
    assert_eq!(code, 0);
    let value: Value = serde_json::from_str(&out).unwrap();
    assert_valid(&schema("coalgebra.schema.json"), &value, "unfold");
    assert_eq!(value["states"], 3);
    let path = dir.path().join("server.coalg.json");
    std::fs::write(&path, &out).unwrap();
    let p = path.display().to_string();
    assert_eq!(run(&["check-thin", &p]).0, 0);
    assert_eq!(run(&["eq", &p, &f("server.coalg.json")]).0, 0);
}

#[test]
fn fixtures_match_schemas() {
    let sig = schema("signature.schema.json");
    let coalg = schema("coalgebra.schema.json");
    let term = schema("term.schema.json");
    let dir = fixture("");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name == "malformed.coalg.json" {
            continue;
        }
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let v = if name.ends_with(".sig.json") {
            &sig
        } else if name.ends_with(".coalg.json") {
            &coalg
        } else {
            &term
        };
        assert_valid(v, &value, &name);
        seen += 1;
    }
    assert!(seen >= 15);
    assert!(!coalg.is_valid(&serde_json::json!({"states": 1, "transitions": [], "extra": 0})));
    assert!(!term.is_valid(&serde_json::json!({"g": {"period": []}})));
}

#[test]
fn validate_reports_every_file_sorted() {
    let (code, out, _) = run(&[
        "validate",
        &f("uomega.term.json"),
        &f("bag.sig.json"),
        &f("server.coalg.json"),
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].contains("bag.sig.json: ok (signature"));
    assert!(lines[1].contains("server.coalg.json: ok (coalgebra"));
    assert!(lines[2].contains("uomega.term.json: ok (term"));
    let (code, _, err) = run(&[
        "validate",
        &f("server.coalg.json"),
        &f("unknown_op.coalg.json"),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("server.coalg.json: ok") && err.contains("unknown operation"));
}

#[test]
fn gen_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&[
        "gen",
        "coalgebra",
        "--size",
        "50",
        "--seed",
        "9",
        "--density",
        "2",
    ])
    .1;
    let b = run(&[
        "gen",
        "coalgebra",
        "--size",
        "50",
        "--seed",
        "9",
        "--density",
        "2",
    ])
    .1;
    let c = run(&[
        "gen",
        "coalgebra",
        "--size",
        "50",
        "--seed",
        "10",
        "--density",
        "2",
    ])
    .1;
    assert_eq!(a, b);
    assert_ne!(a, c);
    let value: Value = serde_json::from_str(&a).unwrap();
    assert_valid(&schema("coalgebra.schema.json"), &value, "gen coalgebra");

    for seed in 0..10 {
        let path = dir.path().join(format!("t{seed}.term.json"));
        let p = path.display().to_string();
        let s = seed.to_string();
        let args = [
            "gen",
            "term",
            "--sig",
            &f("polynomial.sig.json"),
            "--size",
            "6",
            "--seed",
            &s,
            "-o",
            &p,
        ];
        assert_eq!(run(&args).0, 0);
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_valid(&schema("term.schema.json"), &value, "gen term");
        assert_eq!(run(&["validate", &p]).0, 0);
        assert_eq!(run(&["normalize", &p, "--oracle", "--bound", "7"]).0, 0);
    }
    assert_eq!(
        run(&["gen", "term", "--sig", &f("bag.sig.json"), "--size", "6"]).0,
        0
    );
    assert_eq!(run(&["gen", "coalgebra", "--size", "0"]).0, 2);
}

#[test]
fn reports_round_trip_and_validate() {
    let cases: Vec<Vec<String>> = vec![
        vec![
            "validate".into(),
            f("server.coalg.json"),
            f("polynomial.sig.json"),
        ],
        vec!["check-thin".into(), f("bag_loop.coalg.json")],
        vec!["check-thin".into(), f("malformed.coalg.json")],
        vec!["paths".into(), f("server.coalg.json"), "--list".into()],
        vec!["rank".into(), f("server.term.json")],
        vec!["normalize".into(), f("unrolled.term.json")],
        vec!["eq".into(), f("comb.term.json"), f("unrolled.term.json")],
        vec!["unfold".into(), f("comb.term.json")],
        vec!["encode".into(), f("comb.term.json")],
        vec!["cb-rank".into(), f("two_loops.coalg.json")],
        vec!["gen".into(), "term".into(), "--size".into(), "8".into()],
        vec![
            "bench".into(),
            "--sizes".into(),
            "200,400".into(),
            "--repeats".into(),
            "2".into(),
        ],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, value) = report(&args);
        let parsed: RunReport = serde_json::from_value(value.clone()).unwrap();
        assert_eq!(serde_json::to_value(&parsed).unwrap(), value);
        assert!(parsed.timing_ms >= 0.0);
    }
    let (_, v) = report(&["check-thin", &f("server.coalg.json")]);
    let inputs = v["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 1);
    let digest = inputs[0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}
