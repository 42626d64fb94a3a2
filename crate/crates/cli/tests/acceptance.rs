//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestRng, TestRunner};

use lexroad_core::bayes::{build_bn, infer, infer_with, validate_bn, BnError, Evidence, InferenceMethod};
use lexroad_core::boolean::{
    check_properties, equations_equivalent, eval_kleene, truth_table, BoolExpr, RuleEquations, Truth,
};
use lexroad_core::lawmap::{build_lawmap, trace_path};
use lexroad_core::rule_dsl::{parse_rule, pretty_print, RuleSource};
use lexroad_core::rulepack::{load_rulepack, Rulepack};

const EXACT: f64 = 1e-9;
const LIMIT_GOLDEN: Duration = Duration::from_secs(1);
const LIMIT_PROPERTIES: Duration = Duration::from_secs(1);
const LIMIT_BN: Duration = Duration::from_secs(2);
const LIMIT_CROSS: Duration = Duration::from_secs(10);
const LIMIT_TABLE: Duration = Duration::from_secs(5);
const LIMIT_RANDOM: Duration = Duration::from_secs(10);
const CROSS_CASES: u32 = 100;
const NORMALIZE_CASES: u32 = 500;
const KLEENE_CASES: u32 = 500;
const MAX_ROWS: usize = 1 << 11;

/// Equation sets as printed alongside each structured rule. F carries the
/// seat-belt guard it is defined with (F = E ∧ x).
const EXPECTED: &[(&str, &str)] = &[
    ("UK-HC-99-100/1", "B = (q ∨ (r ∨ s)) ∧ y\nD = (q ∨ (r ∨ s)) ∧ ¬y"),
    ("UK-HC-99-100/2", "A = t ∧ z\nE = t ∧ ¬z"),
    ("UK-HC-99-100/3", "C = (u ∨ v ∨ w) ∧ p\nF = (u ∨ v ∨ w) ∧ ¬p ∧ x"),
    ("UK-HC-103", "X = (A × B) × C\nY = (A × B) × ~C"),
    ("UK-HC-103/scenario", "X = (A × B) × C\nY = (A × B) × ~C"),
    ("UK-HC-137-138", "X = A × C\nY = A × ~C"),
    ("UK-HC-191-199", "X = A × C\nY = A × ~C"),
];

/// Requirement text and Vauxhall / Mitsubishi / BMW cells.
const TABLE: [(&str, [&str; 3]); 27] = [
    ("Identifies when a restraint is required", ["✓", "✓", "✓"]),
    ("Identifies correct restraint type", ["✗", "✗", "✗"]),
    ("Identifies when any restraint is unplugged", ["✓", "✗", "✓"]),
    ("Cease smart function when unplugged", ["✗", "✗", "✗"]),
    ("Smart function reads most speed limit signs", ["✓", "N/A", "✓"]),
    ("Smart function identifies most give way signs", ["✗", "N/A", "✓"]),
    ("Smart function identifies most stop signs", ["✗", "N/A", "✗"]),
    ("Smart function is adherent to sign's instructions", ["✗", "N/A", "✗"]),
    ("Smart function automatically alerts when changing lane (LCA)", ["N/A", "N/A", "✓"]),
    ("Smart function automatically alerts when braking (ACC)", ["N/A", "✓", "✓"]),
    ("Smart function automatically cancels signal after use", ["N/A", "✓", "✓"]),
    ("Smart function can detect and cancel signal if it may be misleading to other road users", ["✗", "✗", "✗"]),
    ("Smart function identifies and responds to low light conditions by activating tail, plate and head lights", ["✓", "✓", "✓"]),
    ("Smart function identifies lane markings", ["✓", "N/A", "✓"]),
    ("Smart function alerts driver when about to cross lane markings", ["✓", "N/A", "✓"]),
    ("Smart function able to keep vehicle 'in lane'", ["✓", "N/A", "✓"]),
    ("Smart function prevents crossing solid double lines", ["✗", "N/A", "✗"]),
    ("Smart function correctly identifies when vehicle is not, but should be, in left-most lane", ["✗", "N/A", "✗"]),
    ("Smart function correctly identifies most pedestrians", ["✓", "✓", "✗"]),
    ("Smart function takes appropriate action to avoid accident with pedestrian", ["✗", "✓", "✗"]),
    ("Smart function identifies pedestrian crossings", ["✗", "✗", "✗"]),
    ("Smart function able to verify snow and ice cleared from vehicle", ["✗", "✗", "✗"]),
    ("Smart function able to verify windscreen is free of snow and ice and demisted", ["✓", "N/A", "✓"]),
    ("Smart function able to verify lights and number plates are visible and free of obstruction", ["✗", "✗", "✗"]),
    ("Smart function provides traffic incident and accident alerts", ["✓", "N/A", "✓"]),
    ("Smart function provides information on traffic congestion on route", ["✗", "N/A", "✓"]),
    ("Smart function suggests routes to avoid incidents and/or congestion", ["✓", "N/A", "✓"]),
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn pack() -> Result<Rulepack, String> {
    load_rulepack(&root().join("rulepack")).map_err(|e| e.to_string())
}

fn lexroad(args: &[&str]) -> Result<Vec<u8>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_lexroad"))
        .current_dir(root())
        .env("LEXROAD_RULEPACK", root().join("rulepack"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("lexroad {args:?}: {}", String::from_utf8_lossy(&o.stderr).trim()));
    }
    Ok(o.stdout)
}

fn golden_equations() -> Outcome {
    let pack = pack()?;
    let mut equations = 0;
    for (id, text) in EXPECTED {
        let entry = pack.entry(id).ok_or(format!("{id} not in pack"))?;
        let expected = RuleEquations::from_text(*id, text, None).map_err(|e| e.to_string())?;
        let compiled = &entry.rule.equations;
        if let Some(m) = equations_equivalent(compiled, &expected).map_err(|e| e.to_string())? {
            return Err(format!("{id}: {} differs at {:?}", m.decision, m.witness));
        }
        equations += compiled.equations.len();
    }
    if pack.entries.len() != EXPECTED.len() {
        return Err(format!("{} shipped rules, {} expected", pack.entries.len(), EXPECTED.len()));
    }
    Ok(format!("{} rules, {equations} equations equivalent", EXPECTED.len()))
}

fn properties() -> Outcome {
    let pack = pack()?;
    let mut rows = 0;
    let mut traced = 0;
    for entry in &pack.entries {
        let id = entry.rule_id();
        let eqs = &entry.rule.equations;
        let report = check_properties(eqs).map_err(|e| e.to_string())?;
        if let Some(p) = report.pairs.iter().find(|p| !p.mutually_exclusive) {
            return Err(format!("{id}: {} and {} overlap at {:?}", p.first, p.second, p.witness));
        }
        let table = truth_table(eqs).map_err(|e| e.to_string())?;
        if table.rows.len() > MAX_ROWS {
            return Err(format!("{id}: {} rows", table.rows.len()));
        }
        rows += table.rows.len();
        let graph = build_lawmap(eqs, &entry.rule.ast).map_err(|e| e.to_string())?;
        for (k, row) in table.rows.iter().enumerate() {
            for (d, _) in table.decisions.iter().zip(&row.decisions).filter(|(_, on)| **on) {
                let path = trace_path(&graph, &table.assignment(k)).map_err(|e| e.to_string())?;
                let end = graph.node(path.last().unwrap()).unwrap();
                if !end.decisions.contains(d) {
                    return Err(format!("{id}: {d} row {k} ends at {}", end.id));
                }
                traced += 1;
            }
        }
    }
    Ok(format!("{} rules, {rows} rows exclusive, {traced} solutions traced", pack.entries.len()))
}

fn bn_validation() -> Outcome {
    let pack = pack()?;
    let mut nets = 0;
    let mut sets = 0;
    let bundles = pack.bundles().map_err(|e| e.to_string())?;
    let all = pack
        .entries
        .iter()
        .map(|e| (e.rule_id().to_string(), &e.rule.equations))
        .chain(bundles.iter().map(|b| (b.id.clone(), &b.equations)));
    for (id, eqs) in all {
        let net = build_bn(eqs, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let r = validate_bn(&net, eqs).map_err(|e| e.to_string())?;
        if !r.ok() || r.validated() != eqs.equations.len() {
            return Err(format!("{id}: {} divergences, {} validated", r.divergences.len(), r.validated()));
        }
        nets += 1;
        sets += r.evidence_sets;
    }

    let r3 = &pack.entry("UK-HC-99-100/3").ok_or("rule 3 missing")?.rule.equations;
    let net = build_bn(r3, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let ev: Evidence = [("u", true), ("v", true), ("w", true), ("p", true)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let c = infer(&net, &ev).map_err(|e| e.to_string())?["C"];
    if (c - 1.0).abs() > EXACT {
        return Err(format!("P(C=true) = {c}"));
    }

    let r1 = &pack.entry("UK-HC-99-100/1").ok_or("rule 1 missing")?.rule.equations;
    let b = infer(&build_bn(r1, &BTreeMap::new()).map_err(|e| e.to_string())?, &Evidence::new())
        .map_err(|e| e.to_string())?["B"];
    let oracle = joint_oracle(r1, "B");
    if (b - oracle).abs() > EXACT || (oracle - 7.0 / 16.0).abs() > EXACT {
        return Err(format!("P(B=true) = {b}, oracle {oracle}"));
    }
    Ok(format!("{nets} nets, {sets} evidence sets agree; P(C=true) = {c:.9}; P(B=true) = {b:.9} = oracle {oracle:.9}"))
}

/// Sums uniform joint probability over every fact row where `decision` holds.
fn joint_oracle(eqs: &RuleEquations, decision: &str) -> f64 {
    let vars = eqs.input_vars();
    let e = eqs.expanded(decision).unwrap();
    let n = vars.len();
    let weight = 0.5f64.powi(n as i32);
    (0..1usize << n)
        .filter(|k| e.eval_with(|v| vars.iter().position(|x| x == v).is_some_and(|i| k >> i & 1 == 1)))
        .map(|_| weight)
        .sum()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        ProptestConfig {
            cases,
            failure_persistence: None,
            ..ProptestConfig::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn inference_cross_check() -> Outcome {
    let pack = pack()?;
    let bundles = pack.bundles().map_err(|e| e.to_string())?;
    let all: Vec<(String, &RuleEquations)> = pack
        .entries
        .iter()
        .map(|e| (e.rule_id().to_string(), &e.rule.equations))
        .chain(bundles.iter().map(|b| (b.id.clone(), &b.equations)))
        .collect();
    let mut configs = 0;
    let mut impossible = 0;
    let mut worst = 0.0f64;
    for (id, eqs) in &all {
        let base = build_bn(eqs, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let roots: Vec<String> = base.roots().map(|n| n.id.clone()).collect();
        let nodes: Vec<String> = base.nodes.iter().map(|n| n.id.clone()).collect();
        let (nr, nn) = (roots.len(), nodes.len());
        let strategy = (
            prop::collection::vec(0.01f64..0.99, nr),
            prop::collection::vec(prop::option::weighted(0.3, any::<bool>()), nn),
        );
        let (run, skipped, diff) = (Cell::new(0), Cell::new(0), Cell::new(0.0f64));
        runner(CROSS_CASES)
            .run(&strategy, |(p, ev)| {
                let priors: BTreeMap<String, f64> = roots.iter().cloned().zip(p).collect();
                let evidence: Evidence =
                    nodes.iter().cloned().zip(ev).filter_map(|(k, v)| v.map(|v| (k, v))).collect();
                let net = build_bn(eqs, &priors).unwrap();
                let a = infer_with(&net, &evidence, InferenceMethod::Enumeration);
                let b = infer_with(&net, &evidence, InferenceMethod::VariableElimination);
                run.set(run.get() + 1);
                match (a, b) {
                    (Ok(a), Ok(b)) => {
                        for (k, pa) in &a {
                            let d = (pa - b[k]).abs();
                            diff.set(diff.get().max(d));
                            prop_assert!(d <= EXACT, "{}: {} vs {}", k, pa, b[k]);
                        }
                    }
                    (Err(BnError::ImpossibleEvidence), Err(BnError::ImpossibleEvidence)) => skipped.set(skipped.get() + 1),
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a.err(), b.err()),
                }
                Ok(())
            })
            .map_err(|e| format!("{id}: {e}"))?;
        configs += run.get();
        impossible += skipped.get();
        worst = worst.max(diff.get());
    }
    Ok(format!(
        "{} nets x {CROSS_CASES} configs ({configs} run, {impossible} impossible on both), max diff {worst:.1e}",
        all.len()
    ))
}

fn table_cells(report: &str) -> Vec<(String, Vec<String>)> {
    let lines: Vec<&str> = report.lines().collect();
    let rules: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].starts_with("---")).collect();
    if rules.len() < 2 {
        return Vec::new();
    }
    lines[rules[0] + 1..rules[1]]
        .iter()
        .map(|l| {
            let fields: Vec<String> = l.split("  ").map(str::trim).filter(|f| !f.is_empty()).map(String::from).collect();
            let n = fields.len();
            let cells = fields[n.saturating_sub(3)..].to_vec();
            (fields[n.saturating_sub(4)].clone(), cells)
        })
        .collect()
}

fn table_reproduction() -> Outcome {
    let out = String::from_utf8(lexroad(&["check"])?).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/shipped_report.txt"))
        .map_err(|e| e.to_string())?;
    if out != golden {
        return Err("report differs from golden shipped_report.txt".into());
    }
    let rows = table_cells(&out);
    if rows.len() != TABLE.len() {
        return Err(format!("{} rows, {} expected", rows.len(), TABLE.len()));
    }
    let mut cells = 0;
    for ((text, got), (want_text, want)) in rows.iter().zip(TABLE.iter()) {
        if text != want_text || got != want {
            return Err(format!("row `{want_text}`: got `{text}` {got:?}, expected {want:?}"));
        }
        cells += got.len();
    }
    Ok(format!("{} rows, {cells} cells match", rows.len()))
}

fn round_trip_and_determinism() -> Outcome {
    let pack = pack()?;
    for entry in &pack.entries {
        let id = entry.rule_id();
        let printed = pretty_print(&entry.rule.ast);
        let back = parse_rule(&RuleSource::new(id, printed.as_str())).map_err(|e| format!("{id}: {e}"))?;
        if back != entry.rule.ast {
            return Err(format!("{id}: AST changed after pretty-print"));
        }
    }
    let mut runs: Vec<Vec<&str>> = Vec::new();
    for entry in &pack.entries {
        let stem = entry.stem.as_str();
        runs.push(vec!["lawmap", stem]);
        runs.push(vec!["lawmap", stem, "--format", "json"]);
        runs.push(vec!["compile", stem, "--format", "json"]);
        runs.push(vec!["bn", stem, "--format", "json"]);
    }
    runs.push(vec!["check"]);
    runs.push(vec!["check", "--format", "json"]);
    for args in &runs {
        let (a, b) = (lexroad(args)?, lexroad(args)?);
        if a != b {
            return Err(format!("lexroad {args:?} differs between runs"));
        }
    }
    Ok(format!("{} rules round-trip, {} outputs byte-identical", pack.entries.len(), runs.len()))
}

const VARS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn expr() -> impl Strategy<Value = BoolExpr> {
    let leaf = prop_oneof![
        8 => (0..VARS.len()).prop_map(|i| BoolExpr::var(VARS[i])),
        1 => Just(BoolExpr::True),
        1 => Just(BoolExpr::False),
    ];
    leaf.prop_recursive(5, 48, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| BoolExpr::Not(Box::new(e))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(BoolExpr::And),
            prop::collection::vec(inner, 2..4).prop_map(BoolExpr::Or),
        ]
    })
}

fn bit(k: usize, v: &str) -> bool {
    VARS.iter().position(|n| *n == v).is_some_and(|i| k >> i & 1 == 1)
}

fn randomized() -> Outcome {
    let normalized = Cell::new(0);
    runner(NORMALIZE_CASES)
        .run(&expr(), |e| {
            prop_assert!(e.depth() <= 6);
            let n = e.normalize();
            for k in 0..1usize << VARS.len() {
                prop_assert_eq!(e.eval_with(|v| bit(k, v)), n.eval_with(|v| bit(k, v)));
            }
            normalized.set(normalized.get() + 1);
            Ok(())
        })
        .map_err(|e| format!("normalize: {e}"))?;

    let partial = prop::collection::vec(prop_oneof![Just(Truth::True), Just(Truth::False), Just(Truth::Unknown)], 8);
    let (checked, definite) = (Cell::new(0), Cell::new(0));
    runner(KLEENE_CASES)
        .run(&(expr(), partial), |(e, values)| {
            let known = |v: &str| VARS.iter().position(|n| *n == v).map_or(Truth::Unknown, |i| values[i]);
            let k = eval_kleene(&e, known);
            let open: Vec<usize> = (0..8).filter(|&i| values[i] == Truth::Unknown).collect();
            let mut seen = [false; 2];
            for mask in 0..1usize << open.len() {
                let full = |v: &str| {
                    let i = VARS.iter().position(|n| *n == v).unwrap();
                    match open.iter().position(|&o| o == i) {
                        Some(b) => mask >> b & 1 == 1,
                        None => values[i] == Truth::True,
                    }
                };
                seen[e.eval_with(full) as usize] = true;
            }
            if let Some(b) = k.as_bool() {
                prop_assert!(!seen[!b as usize], "{} is {:?} but a completion gives {}", e.display(Default::default()), k, !b);
                definite.set(definite.get() + 1);
            }
            checked.set(checked.get() + 1);
            Ok(())
        })
        .map_err(|e| format!("kleene: {e}"))?;
    Ok(format!(
        "{} expressions keep their truth table; {} partial assignments sound ({} definite)",
        normalized.get(),
        checked.get(),
        definite.get()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("golden equations", LIMIT_GOLDEN, golden_equations),
        ("exclusivity and lawmap paths", LIMIT_PROPERTIES, properties),
        ("bn validation", LIMIT_BN, bn_validation),
        ("enumeration vs elimination", LIMIT_CROSS, inference_cross_check),
        ("compliance table", LIMIT_TABLE, table_reproduction),
        ("round trip and determinism", Duration::MAX, round_trip_and_determinism),
        ("randomized properties", LIMIT_RANDOM, randomized),
    ];
    let mut failed = 0;
    for (n, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let limit_text = if *limit == Duration::MAX {
            "no limit".to_string()
        } else {
            format!("limit {} ms", limit.as_millis())
        };
        let verdict = match outcome {
            Ok(detail) if took <= *limit => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("{detail}; too slow")),
            Err(why) => ("FAIL", why),
        };
        if verdict.0 == "FAIL" {
            failed += 1;
        }
        println!("{} {} {name}: {} [{} ms, {limit_text}]", verdict.0, n + 1, verdict.1, took.as_millis());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
