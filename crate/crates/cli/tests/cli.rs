use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn lexroad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexroad"))
        .current_dir(root())
        .env("LEXROAD_RULEPACK", root().join("rulepack"))
        .args(args)
        .output()
        .expect("failed to spawn lexroad")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = lexroad(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn assert_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from golden file {name}");
}

fn scenario(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.display().to_string()
}

#[test]
fn compile_rule_103() {
    assert_eq!(ok(&["compile", "rulepack/103.rule"]), "X = (A ∧ B) ∧ C\nY = (A ∧ B) ∧ ¬C\n");
}

#[test]
fn compile_ascii() {
    let out = ok(&["compile", "rulepack/99-100-r1.rule", "--ascii"]);
    assert_eq!(out.lines().next(), Some("B = (q | (r | s)) & y"));
}

#[test]
fn compile_by_id() {
    assert_eq!(ok(&["compile", "UK-HC-99-100/2"]), "A = t ∧ z\nE = t ∧ ¬z\n");
    let bundle = ok(&["compile", "UK-HC-99-100"]);
    assert_eq!(bundle.lines().count(), 6);
}

#[test]
fn compile_json_is_parseable() {
    let out = ok(&["compile", "rulepack/137-138.rule", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rule_id"], "UK-HC-137-138");
}

#[test]
fn malformed_rule_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.rule");
    fs::write(&path, "rule: bad\n\nIF:\n    [A] p.\n    [A] q.\nELSE:\n    [Y] r.\n").unwrap();
    let o = lexroad(&["compile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o), format!("{}:5:5: error: duplicate label `A`\n", path.display()));
}

#[test]
fn naming_conflict_is_a_compile_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clash.rule");
    fs::write(&path, "rule: clash\n\nIF:\n    [A] p; and, @var(v)\n    [B] q. @var(v)\nELSE:\n    [Y] r.\n").unwrap();
    assert_eq!(lexroad(&["compile", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn eval_rule_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "s.json", r#"{"rule_id": "UK-HC-99-100/2", "facts": {"t": true, "z": false}}"#);
    assert!(ok(&["eval", "rulepack/99-100-r2.rule", &s]).contains("E: TRUE (Correct child restraint MUST be used)\n"));
}

#[test]
fn eval_rule_1() {
    let out = ok(&["eval", "rulepack/99-100-r1.rule", "rulepack/scenarios/99-100-r1-adult-no-belt.json"]);
    assert_eq!(out, "B: TRUE (Seat belt cannot be worn)\nD: FALSE (Seat belt MUST be worn)\n");
}

#[test]
fn eval_empty_scenario_warns() {
    let o = lexroad(&["eval", "rulepack/103.rule", "rulepack/scenarios/empty.json"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.contains(": UNKNOWN")));
    assert!(stderr(&o).contains("warning:"));
}

#[test]
fn eval_unknown_fact() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "s.json", r#"{"rule_id": "UK-HC-103", "facts": {"Q": true}}"#);
    let o = lexroad(&["eval", "rulepack/103.rule", &s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`Q` is not an input variable"));
}

#[test]
fn lawmap_dot_golden() {
    let out = ok(&["lawmap", "rulepack/191-199.rule", "-f", "dot"]);
    assert!(out.contains("\"o:X\" [shape=box") && out.contains("\"o:Y\" [shape=box"));
    assert_golden("lawmap_191-199.dot", &out);
}

#[test]
fn lawmap_trace_highlights_path() {
    let out = ok(&["lawmap", "rulepack/191-199.rule", "--trace", "rulepack/scenarios/191-199-pedestrian.json"]);
    assert!(out.contains("\"c2\" -> \"o:Y\" [label=\"no\", color=red, penwidth=2];"), "{out}");
    assert!(!out.contains("\"c2\" -> \"o:X\" [label=\"yes\", color=red"));
}

#[test]
fn lawmap_incomplete_trace() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "s.json", r#"{"rule_id": "UK-HC-103", "facts": {"A": true}}"#);
    let o = lexroad(&["lawmap", "rulepack/103.rule", "--trace", &s]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing: B, C"), "{}", stderr(&o));
}

#[test]
fn lawmap_json_round_trips() {
    let out = ok(&["lawmap", "rulepack/103.rule", "--format", "json"]);
    let g = lexroad_core::lawmap::import_json(&out).unwrap();
    assert_eq!(lexroad_core::lawmap::export_json(&g), out);
}

#[test]
fn bn_infer_forcing_evidence() {
    let out = ok(&["bn", "rulepack/99-100-r3.rule", "--infer", "u=true,p=true"]);
    assert!(out.contains("P(C=true) = 1.000000000\n"), "{out}");
}

#[test]
fn bn_validate_bundle() {
    let out = ok(&["bn", "UK-HC-99-100", "--validate"]);
    assert!(out.ends_with("6/6 equations validated\n"), "{out}");
    assert!(out.starts_with("UK-HC-99-100: 2048/2048 evidence sets agree\n"));
}

#[test]
fn bn_validate_every_rule() {
    for rule in ["103", "103-scenario", "137-138", "191-199", "99-100-r1", "99-100-r2", "99-100-r3"] {
        let out = ok(&["bn", &format!("rulepack/{rule}.rule"), "--validate"]);
        assert!(out.ends_with("2/2 equations validated\n"), "{rule}: {out}");
    }
}

#[test]
fn bn_impossible_evidence() {
    let o = lexroad(&["bn", "rulepack/99-100-r3.rule", "--infer", "C=true,p=false"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("zero probability"));
}

#[test]
fn bn_rule_1_prior_query() {
    let out = ok(&["bn", "rulepack/99-100-r1.rule", "--infer", ""]);
    assert!(out.contains("P(B=true) = 0.437500000\n"), "{out}");
}

#[test]
fn bn_bad_prior() {
    let o = lexroad(&["bn", "rulepack/103.rule", "--prior", "A=1.5"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bn_export_json() {
    let out = ok(&["bn", "rulepack/103.rule", "--format", "json"]);
    let net = lexroad_core::bayes::BayesNet::from_json(&out).unwrap();
    assert_eq!(net.rule_id, "UK-HC-103");
}

#[test]
fn check_shipped_report_golden() {
    assert_golden("shipped_report.txt", &ok(&["check"]));
}

#[test]
fn check_bmw_golden() {
    let out = ok(&["check", "rulepack/vehicles/bmw-740li.profile.json"]);
    assert!(out.contains("Smart function reads most speed limit signs"));
    assert_golden("bmw-740li.txt", &out);
}

#[test]
fn check_mitsubishi_sign_rows_are_na() {
    let out = ok(&["check", "rulepack/vehicles/mitsubishi-shogun-sport.profile.json"]);
    for row in ["reads most speed limit signs", "identifies most give way signs", "identifies most stop signs"] {
        let line = out.lines().find(|l| l.contains(row)).unwrap();
        assert!(line.ends_with("N/A"), "{line}");
    }
}

#[test]
fn check_all_met_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(root().join("rulepack/vehicles/bmw-740li.profile.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&src).unwrap();
    for a in v["answers"].as_object_mut().unwrap().values_mut() {
        *a = "MET".into();
    }
    v["vehicle_id"] = "ideal".into();
    let path = dir.path().join("ideal.profile.json");
    fs::write(&path, v.to_string()).unwrap();
    let out = ok(&["check", path.to_str().unwrap(), "--format", "json"]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ratings = report["vehicles"][0]["ratings"].as_array().unwrap();
    assert_eq!(ratings.len(), 7);
    assert!(ratings.iter().all(|r| r["rating"] == "GREEN"));
}

#[test]
fn check_incomplete_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.profile.json");
    fs::write(&path, r#"{"vehicle_id": "x", "answers": {"113.1": "MET"}}"#).unwrap();
    let o = lexroad(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("profile `x` has no answer for: 99-100.1"));
}

#[test]
fn check_out_file_and_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    ok(&["check", "--out", out.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["tool"]["name"], "lexroad");
    assert!(report.get("generated_at").is_none());
    assert_eq!(report["inputs"].as_object().unwrap().len(), 7 * 2 + 7 + 3 + 8);
    let stamped = ok(&["check", "--timestamps"]);
    assert!(stamped.lines().nth(1).unwrap().starts_with("generated "));
}

#[test]
fn tampered_golden_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["103.rule", "103.golden.beq"] {
        fs::copy(root().join("rulepack").join(name), dir.path().join(name)).unwrap();
    }
    fs::write(dir.path().join("103.golden.beq"), "X = A ∧ C\nY = (A ∧ B) ∧ ¬C\n").unwrap();
    let o = lexroad(&["--pack", dir.path().to_str().unwrap(), "check"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("compiled `X` differs from golden at {A:T, B:F, C:T}"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(lexroad(&["compile"]).status.code(), Some(64));
    assert_eq!(lexroad(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(lexroad(&["bn", "rulepack/103.rule", "--infer", "A"]).status.code(), Some(64));
    assert_eq!(lexroad(&["lawmap", "UK-HC-99-100"]).status.code(), Some(64));
    assert!(lexroad(&["--help"]).status.success());
}

#[test]
fn missing_file_exits_1() {
    assert_eq!(lexroad(&["compile", "no/such.rule"]).status.code(), Some(1));
}
