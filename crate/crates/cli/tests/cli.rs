use std::process::{Command, Output};

use serde_json::Value;

fn polyhyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyhyp"))
        .args(args)
        .output()
        .expect("spawn polyhyp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(o)))
}

fn column(v: &Value, name: &str) -> Vec<String> {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[name].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn qleg_coefficients_row_one() {
    let o = polyhyp(&["--format", "csv", "coeffs", "qleg", "--q", "1/2", "-N", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "1,18/35,1/5,2/7"), "{out}");
}

#[test]
fn pollaczek_c_column() {
    let o = polyhyp(&[
        "--format",
        "json",
        "coeffs",
        "pollaczek",
        "--alpha",
        "0",
        "--lambda",
        "1/4",
        "--nu",
        "0",
        "-N",
        "2",
    ]);
    assert!(o.status.success());
    assert_eq!(column(&json(&o), "c"), ["0", "4/21", "48/187"]);
}

#[test]
fn out_of_range_parameter_is_usage_error() {
    let o = polyhyp(&["coeffs", "pollaczek", "--alpha", "-1", "-N", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn decimal_rejected_in_rational_mode() {
    let o = polyhyp(&["--mode", "rational", "coeffs", "qleg", "--q", "0.5", "-N", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = polyhyp(&["--mode", "auto", "coeffs", "qleg", "--q", "0.5", "-N", "2"]);
    assert!(o.status.success());
}

#[test]
fn linearize_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "--cache-dir",
        d,
        "--format",
        "json",
        "linearize",
        "qleg",
        "--q",
        "1/2",
        "-m",
        "1",
        "-n",
        "1",
    ];
    let first = json(&polyhyp(&args));
    assert_eq!(first["cache"], "miss");
    assert_eq!(column(&first, "g"), ["2/7", "1/5", "18/35"]);
    assert_eq!(column(&first, "k"), ["0", "1", "2"]);
    let second = json(&polyhyp(&args));
    assert_eq!(second["cache"], "hit");
    assert_eq!(column(&second, "g"), column(&first, "g"));

    // a damaged entry is recomputed, not trusted
    let entry = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    std::fs::write(&entry, "{\"format\": \"something else\"}").unwrap();
    let third = json(&polyhyp(&args));
    assert_eq!(third["cache"], "miss");
    assert_eq!(column(&third, "g"), ["2/7", "1/5", "18/35"]);
}

#[test]
fn cache_key_separates_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = json(&polyhyp(&[
        "--cache-dir",
        d,
        "--format",
        "json",
        "linearize",
        "qleg",
        "--q",
        "1/2",
        "-m",
        "1",
        "-n",
        "1",
    ]));
    let b = json(&polyhyp(&[
        "--cache-dir",
        d,
        "--format",
        "json",
        "linearize",
        "qleg",
        "--q",
        "1/3",
        "-m",
        "1",
        "-n",
        "1",
    ]));
    assert_eq!(b["cache"], "miss");
    assert_ne!(column(&a, "g"), column(&b, "g"));
}

#[test]
fn linearize_with_trivial_character() {
    let o = polyhyp(&["--format", "json", "linearize", "qleg", "--q", "1/2", "-m", "0", "-n", "7"]);
    let v = json(&o);
    assert_eq!(column(&v, "k"), ["7"]);
    assert_eq!(column(&v, "g"), ["1"]);
}

#[test]
fn haar_matches_inverse_g() {
    let v = json(&polyhyp(&["--format", "json", "haar", "qleg", "--q", "1/2", "-N", "5"]));
    assert_eq!(column(&v, "h"), column(&v, "inv_g_nn0"));
    assert_eq!(column(&v, "h")[1], "7/2");
}

#[test]
fn eval_forms() {
    let v = json(&polyhyp(&["--format", "json", "eval", "qleg", "--q", "1/2", "-n", "4", "-x", "1"]));
    assert_eq!(column(&v, "value"), ["1"]);
    let o = polyhyp(&["eval", "qleg", "--q", "1/2", "-n", "4", "-x", "1", "--form", "sideways"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn character_bound_violation_exits_one() {
    let ok = polyhyp(&["character", "qleg", "--q", "1/2", "-x", "1/2", "-K", "10", "--assert-bounded"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = polyhyp(&[
        "--format",
        "json",
        "character",
        "qleg",
        "--q",
        "1/2",
        "-x",
        "3",
        "-K",
        "10",
        "--assert-bounded",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["bound_violation"], 1);
}

#[test]
fn chain_minimal_and_not_chain() {
    let v = json(&polyhyp(&["--format", "json", "chain", "minimal", "--constant", "1/4", "-N", "3"]));
    assert_eq!(column(&v, "m"), ["0", "1/4", "1/3", "3/8"]);
    let o = polyhyp(&["--format", "json", "chain", "minimal", "--constant", "3/10", "-N", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["chain"], false);
}

#[test]
fn worpitzky_breakdown_reported() {
    let v = json(&polyhyp(&["chain", "worpitzky", "--partial", "1/2", "--depth", "10"]));
    assert_eq!(v["contained"], Value::Null);
    assert!(v["breakdown"].is_number());
}

#[test]
fn verify_exit_codes() {
    let o = polyhyp(&["verify", "nosuch"]);
    assert_eq!(o.status.code(), Some(3));
    let o = polyhyp(&["verify", "qleg-lemma35", "--size", "bogus=3"]);
    assert_eq!(o.status.code(), Some(3));
    let o = polyhyp(&["--format", "json", "verify", "qleg-lemma35", "--q", "1/2", "--size", "N=20"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["sizes"]["N"], 20);
    let o = polyhyp(&[
        "--format",
        "json",
        "verify",
        "poll-thm25",
        "--alpha",
        "-2/5",
        "--lambda",
        "5",
        "--nu",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["status"], "fail");
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["--format", "json", "verify", "qleg-lemma34", "--size", "K=30"];
    let a = polyhyp(&args);
    let b = polyhyp(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("runtime_ms"));
}

#[test]
fn verify_csv_header() {
    let o = polyhyp(&["--format", "csv", "verify", "qleg-lemma35", "--q", "1/4"]);
    assert!(stdout(&o).starts_with("suite,overall,claim,anchor,status,margin,witness,note"));
}

#[test]
fn list_suites_has_catalog() {
    let v = json(&polyhyp(&["--format", "json", "list-suites"]));
    let names = column(&v, "suite");
    assert_eq!(names.len(), 17);
    for s in ["qleg-basics", "poll-lemma38", "appendixA", "turan", "chain-basics"] {
        assert!(names.iter().any(|n| n == s), "{s} missing");
    }
}

#[test]
fn clap_errors_and_help() {
    assert_eq!(polyhyp(&["--help"]).status.code(), Some(0));
    assert_eq!(polyhyp(&["--version"]).status.code(), Some(0));
    assert_eq!(polyhyp(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(
        polyhyp(&["--precision", "12", "coeffs", "qleg", "--q", "1/2"]).status.code(),
        Some(3)
    );
}
