use std::path::PathBuf;
use std::process::Command;

use concsys_cli::{run_with, EXIT_ANALYSIS, EXIT_INPUT, EXIT_OK};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("concsys").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.push("--json");
    let (code, out, _) = run(&full);
    (code, serde_json::from_str(&out).unwrap())
}

fn write_tmp(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn check_e1_is_irreducible() {
    let (code, v) = json(&["check", "--fixture", "e1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["irreducible"], Value::Bool(true));
    let (code, out, _) = run(&["check", "--fixture", "e1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("irreducible: true"));
}

#[test]
fn analyze_aztec_report() {
    let (code, out, _) = run(&["analyze", "--fixture", "aztec", "--json"]);
    assert_eq!(code, EXIT_OK);
    let keys = [
        "system",
        "classification",
        "polynomials",
        "root",
        "graphs",
        "nodes",
        "gamma",
        "tables",
        "g",
        "mcsc",
        "spectral_property",
        "diagnostics",
    ];
    let positions: Vec<usize> = keys
        .iter()
        .map(|k| out.find(&format!("\n  \"{k}\": ")).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = v["root"]["approx"].as_f64().unwrap();
    assert!((r - 0.525).abs() < 1e-3);
    assert_eq!(v["graphs"]["null_nodes"].as_array().unwrap().len(), 8);
    assert_eq!(v["graphs"]["dsc_plus_terminal_components"], 1);
    assert_eq!(v["spectral_property"]["holds"], Value::Bool(true));
    assert_eq!(v["diagnostics"]["pass"], Value::Bool(true));
}

#[test]
fn analyze_e1_polynomials_are_coefficient_arrays() {
    let (_, v) = json(&["analyze", "--fixture", "e1"]);
    assert_eq!(v["polynomials"]["theta"], serde_json::json!([1, -3, 2]));
    assert_eq!(v["polynomials"]["mobius"][0][0], serde_json::json!([1, -2, 1]));
    assert_eq!(v["root"]["lo"], "1/2");
    assert_eq!(v["mcsc"]["unreachable"], serde_json::json!(["(α0,d)"]));
}

#[test]
fn oracle_e1_passes() {
    let (code, out, _) = run(&["oracle", "--fixture", "e1", "--max-len", "8"]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn reducible_system_fails_when_irreducibility_is_expected() {
    let (code, _, _) = run(&["analyze", "--fixture", "tm2"]);
    assert_eq!(code, EXIT_OK);
    let (code, v) = json(&["analyze", "--fixture", "tm2", "--expect-irreducible"]);
    assert_eq!(code, EXIT_ANALYSIS);
    assert_eq!(v["spectral_property"]["holds"], Value::Bool(false));
    assert_eq!(v["gamma"], Value::Null);
    let (code, _, _) = run(&["check", "--fixture", "tm2", "--expect-irreducible"]);
    assert_eq!(code, EXIT_ANALYSIS);
    let (code, _, err) = run(&["sample", "--fixture", "tm2"]);
    assert_eq!(code, EXIT_ANALYSIS);
    assert!(err.contains("not irreducible"));
}

#[test]
fn input_errors_exit_with_two() {
    let path = write_tmp("missing_states.sys", "[alphabet] a\n[action]\n");
    let (code, _, err) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("[states]"), "{err}");

    let path = write_tmp(
        "diamond.sys",
        "[alphabet] a b\n[independence] a b\n[states] s t\n[action]\ns a t\nt b s\n",
    );
    let (code, v) = json(&["check", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert_eq!(v["exit_code"], 2);
    assert!(v["error"].as_str().unwrap().contains("does not commute"));

    let (code, _, _) = run(&["check", "/nonexistent/file.sys"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = run(&["sample", "--fixture", "e1", "--start", "nowhere"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = run(&["check"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = run(&["export-dot", "--fixture", "e1", "--graph", "bogus"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("analyze"));
}

#[test]
fn petri_input_is_detected() {
    let text = "\
# two independent loops
[places] p1 p2 q1 q2
[transitions] t1 t2 u1 u2
[flow] p1 -> t1, t1 -> p2, p2 -> t2, t2 -> p1
q1 -> u1, u1 -> q2, q2 -> u2, u2 -> q1
[marking] p1 q1
";
    let path = write_tmp("loops.net", text);
    let (code, v) = json(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["system"]["states"].as_array().unwrap().len(), 4);
    let bad = write_tmp(
        "unsafe.net",
        "[places] p q\n[transitions] t\n[flow] p -> t, t -> p, t -> q\n[marking] p q\n",
    );
    let (code, _, err) = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("1-bounded"), "{err}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cases: [&[&str]; 6] = [
        &["analyze", "--fixture", "aztec", "--json"],
        &["analyze", "--fixture", "twelve"],
        &["sample", "--fixture", "aztec", "--count", "5", "--seed", "3", "--json"],
        &[
            "sample",
            "--fixture",
            "e1",
            "--mode",
            "uniform",
            "--length",
            "12",
            "--count",
            "5",
            "--seed",
            "3",
        ],
        &["export-dot", "--fixture", "aztec", "--graph", "adsc"],
        &["export-dot", "--fixture", "aztec", "--graph", "condensation"],
    ];
    for args in cases {
        let first = run(args);
        assert_eq!(first.0, EXIT_OK, "{args:?}: {}", first.2);
        assert_eq!(first, run(args), "{args:?}");
    }
}

#[test]
fn samples_replay_and_seeds_matter() {
    let (_, a) = json(&[
        "sample",
        "--fixture",
        "e1",
        "--mode",
        "uniform",
        "--length",
        "12",
        "--count",
        "4",
        "--seed",
        "1",
    ]);
    let (_, b) = json(&[
        "sample",
        "--fixture",
        "e1",
        "--mode",
        "uniform",
        "--length",
        "12",
        "--count",
        "4",
        "--seed",
        "2",
    ]);
    assert_ne!(a["samples"], b["samples"]);
    let sys = concsys::fixtures::e1();
    for s in a["samples"].as_array().unwrap() {
        let word = sys.monoid().parse_word(s["word"].as_str().unwrap()).unwrap();
        assert_eq!(word.len(), 12);
        assert!(sys.act(0, &word).is_some());
    }
}

#[test]
fn export_dot_graph_kinds() {
    let (_, dsc, _) = run(&["export-dot", "--fixture", "e1"]);
    assert!(dsc.starts_with("digraph dsc {"));
    let (_, states, _) = run(&["export-dot", "--fixture", "e1", "--graph", "states"]);
    assert!(states.contains("[label=\"c\"]"));
    let (_, adsc, _) = run(&["export-dot", "--fixture", "e1", "--graph", "adsc"]);
    assert_eq!(adsc.matches("[label=").count(), 9);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_concsys");
    let ok = Command::new(bin).args(["check", "--fixture", "e1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["check", "--fixture", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
    let fail = Command::new(bin)
        .args(["analyze", "--fixture", "tm2", "--expect-irreducible"])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(EXIT_ANALYSIS));
}
