use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lexroad_core::bayes::{
    build_bn, infer_with, validate_bn, BayesNet, BnNodeKind, EquationStatus, Evidence, InferenceMethod,
};
use lexroad_core::boolean::{check_properties, evaluate, RuleEquations, Symbols, Truth};
use lexroad_core::lawmap::{build_lawmap, export_dot, export_dot_traced, export_json, trace_path};
use lexroad_core::report::{sha256_hex, ComplianceReport, ScenarioFile};
use lexroad_core::rulepack::{compile_rule_file, load_profile, load_rulepack, CompiledRule};

use crate::failure::{Failure, EXIT_COMPILE, EXIT_INFERENCE, EXIT_PARSE};
use crate::{Context, Format};

/// A rule argument resolved to equations, plus the compiled source when it
/// names a single rule.
struct Resolved {
    label: String,
    equations: RuleEquations,
    rule: Option<CompiledRule>,
}

fn resolve(ctx: &Context, arg: &str) -> Result<Resolved, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let rule = compile_rule_file(path).map_err(Failure::from_rule)?;
        return Ok(Resolved {
            label: arg.to_string(),
            equations: rule.equations.clone(),
            rule: Some(rule),
        });
    }
    if !ctx.pack.is_dir() {
        return Err(Failure::new(EXIT_PARSE, Some(arg), "no such rule file, and no rulepack to look the id up in"));
    }
    let pack = load_rulepack(&ctx.pack).map_err(Failure::integrity)?;
    if let Some(entry) = pack.entry(arg) {
        return Ok(Resolved {
            label: entry.path.display().to_string(),
            equations: entry.rule.equations.clone(),
            rule: Some(entry.rule.clone()),
        });
    }
    let bundles = pack.bundles().map_err(Failure::integrity)?;
    match bundles.into_iter().find(|b| b.id == arg) {
        Some(b) => Ok(Resolved {
            label: b.id,
            equations: b.equations,
            rule: None,
        }),
        None => Err(Failure::new(
            EXIT_PARSE,
            Some(arg),
            format!("no such rule file, and no rule or bundle with this id in {}", ctx.pack.display()),
        )),
    }
}

fn symbols(ctx: &Context) -> Symbols {
    if ctx.ascii {
        Symbols::Ascii
    } else {
        Symbols::Unicode
    }
}

fn pretty_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    pretty_json(&serde_json::to_value(value).expect("value serializes"))
}

/// THEN/ELSE decision ids bound at the top level of each outcome section.
fn outcome_pairs(rule: &CompiledRule) -> Vec<(String, String)> {
    let bound = |section: &str| -> Vec<String> {
        let prefix = format!("{section}.");
        rule.equations
            .table
            .bindings()
            .iter()
            .filter(|(p, id)| p.starts_with(&prefix) && !p[prefix.len()..].contains('.') && rule.equations.table.is_decision(id))
            .map(|(_, id)| id.clone())
            .collect()
    };
    let (then, other) = (bound("THEN"), bound("ELSE"));
    then.iter().flat_map(|t| other.iter().map(move |e| (t.clone(), e.clone()))).collect()
}

pub fn compile(ctx: &Context, arg: &str) -> Result<String, Failure> {
    let r = resolve(ctx, arg)?;
    if let Some(rule) = &r.rule {
        let props = check_properties(&r.equations).map_err(|e| Failure::new(EXIT_COMPILE, Some(&r.label), e.to_string()))?;
        for (a, b) in outcome_pairs(rule) {
            if let Some(p) = props.pair(&a, &b).filter(|p| !p.mutually_exclusive) {
                let at = p.witness.as_ref().map(|w| format!(" at {w}")).unwrap_or_default();
                eprintln!("{}: warning: `{a}` and `{b}` can both hold{at}", r.label);
            }
        }
    }
    Ok(match ctx.format {
        Some(Format::Json) => to_json(&r.equations),
        _ => r.equations.to_text(symbols(ctx)),
    })
}

fn read_scenario(path: &Path, eqs: &RuleEquations) -> Result<(ScenarioFile, lexroad_core::boolean::Assignment), Failure> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(&label, e))?;
    let scenario = ScenarioFile::from_json(&text).map_err(|e| Failure::new(EXIT_PARSE, Some(&label), e.to_string()))?;
    let asg = scenario
        .assignment(eqs)
        .map_err(|e| Failure::new(EXIT_PARSE, Some(&label), e.to_string()))?;
    Ok((scenario, asg))
}

pub fn eval(ctx: &Context, arg: &str, scenario: &Path) -> Result<String, Failure> {
    let r = resolve(ctx, arg)?;
    let (s, asg) = read_scenario(scenario, &r.equations)?;
    if asg.is_empty() {
        eprintln!("{}: warning: scenario sets no facts; every decision is UNKNOWN", scenario.display());
    }
    let values = evaluate(&r.equations, &asg);
    let eqs = &r.equations;
    Ok(match ctx.format {
        Some(Format::Json) => {
            let decisions: BTreeMap<&str, Truth> = eqs.decisions().map(|d| (d, values[d])).collect();
            pretty_json(&serde_json::json!({
                "rule_id": eqs.rule_id,
                "description": s.description,
                "facts": s.facts,
                "decisions": decisions,
            }))
        }
        _ => eqs
            .decisions()
            .map(|d| {
                let text = eqs.table.get(d).map(|v| v.description.as_str()).unwrap_or("");
                if text.is_empty() {
                    format!("{d}: {}\n", values[d])
                } else {
                    format!("{d}: {} ({text})\n", values[d])
                }
            })
            .collect(),
    })
}

pub fn lawmap(ctx: &Context, arg: &str, trace: Option<&Path>) -> Result<String, Failure> {
    let r = resolve(ctx, arg)?;
    let rule = r
        .rule
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("`{arg}` is a bundle; a Lawmap is drawn for one rule")))?;
    let graph = build_lawmap(&r.equations, &rule.ast)
        .map_err(|e| Failure::lawmap(e, None))?
        .with_citations(&rule.file.source.citations);
    let path = match trace {
        Some(p) => {
            let (_, asg) = read_scenario(p, &r.equations)?;
            Some(trace_path(&graph, &asg).map_err(|e| Failure::lawmap(e, Some(&p.display().to_string())))?)
        }
        None => None,
    };
    Ok(match (ctx.format, path) {
        (Some(Format::Json), None) => export_json(&graph),
        (Some(Format::Json), Some(path)) => {
            let mut value: serde_json::Value = serde_json::from_str(&export_json(&graph)).expect("graph json parses");
            value["trace"] = serde_json::json!(path);
            pretty_json(&value)
        }
        (_, None) => export_dot(&graph),
        (_, Some(path)) => export_dot_traced(&graph, &path),
    })
}

pub enum BnMode {
    Export,
    Infer(String),
    Validate,
}

fn parse_pairs<T>(spec: &str, what: &str, value: impl Fn(&str) -> Option<T>) -> Result<Vec<(String, T)>, Failure> {
    let pairs: Vec<(String, T)> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parsed = item.split_once('=').and_then(|(k, v)| Some((k.trim().to_string(), value(v.trim())?)));
            parsed.ok_or_else(|| Failure::usage(format!("bad {what} `{item}`; expected `id=value`")))
        })
        .collect::<Result<_, _>>()?;
    for (i, (k, _)) in pairs.iter().enumerate() {
        if pairs[..i].iter().any(|(j, _)| j == k) {
            return Err(Failure::usage(format!("{what} for `{k}` given twice")));
        }
    }
    Ok(pairs)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "t" | "1" | "yes" => Some(true),
        "false" | "f" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn net_summary(net: &BayesNet) -> String {
    let mut out = format!("{}: {} nodes, {} edges\n", net.rule_id, net.nodes.len(), net.edges().len());
    for n in &net.nodes {
        let kind = match n.kind {
            BnNodeKind::FactRoot => "root",
            BnNodeKind::Clause => "clause",
            BnNodeKind::Decision => "decision",
        };
        match n.prior() {
            Some(p) => out.push_str(&format!("  {:<8} {}  P(true) = {p}\n", kind, n.id)),
            None => out.push_str(&format!("  {:<8} {}  <- {}\n", kind, n.id, n.parents.join(", "))),
        }
    }
    out
}

pub fn bn(ctx: &Context, arg: &str, mode: BnMode, priors: &[String], method: InferenceMethod) -> Result<String, Failure> {
    let r = resolve(ctx, arg)?;
    let mut prior_map = BTreeMap::new();
    for spec in priors {
        prior_map.extend(parse_pairs(spec, "prior", |v| v.parse::<f64>().ok())?);
    }
    let net = build_bn(&r.equations, &prior_map).map_err(Failure::inference)?;
    let json = ctx.format == Some(Format::Json);
    match mode {
        BnMode::Export => Ok(if json { net.to_json() } else { net_summary(&net) }),
        BnMode::Infer(spec) => {
            let evidence: Evidence = parse_pairs(&spec, "evidence", parse_bool)?.into_iter().collect();
            let posteriors = infer_with(&net, &evidence, method).map_err(Failure::inference)?;
            if json {
                return Ok(to_json(&serde_json::json!({
                    "rule_id": net.rule_id,
                    "evidence": evidence,
                    "posteriors": posteriors,
                })));
            }
            Ok(net
                .of_kind(BnNodeKind::Decision)
                .map(|n| format!("P({}=true) = {:.9}\n", n.id, posteriors[&n.id]))
                .collect())
        }
        BnMode::Validate => {
            let report = validate_bn(&net, &r.equations).map_err(Failure::inference)?;
            let satisfiable = report.equations.iter().filter(|e| e.status != EquationStatus::Unsatisfiable).count();
            if !report.ok() {
                let first = report
                    .divergences
                    .first()
                    .map(|d| format!("; first: {} at {} (expected {})", d.decision, d.evidence, d.expected))
                    .unwrap_or_default();
                return Err(Failure::new(
                    EXIT_INFERENCE,
                    Some(&r.label),
                    format!(
                        "network disagrees with the equations on {} of {} evidence sets{first}",
                        report.evidence_sets - report.agreeing_sets,
                        report.evidence_sets
                    ),
                ));
            }
            if json {
                return Ok(to_json(&report));
            }
            let mut out = format!(
                "{}: {}/{} evidence sets agree\n",
                report.rule_id, report.agreeing_sets, report.evidence_sets
            );
            for e in &report.equations {
                match e.status {
                    EquationStatus::Unsatisfiable => out.push_str(&format!("  {}: never true\n", e.decision)),
                    _ => out.push_str(&format!(
                        "  {}: P({}=true) = {:.9} given {}\n",
                        e.decision,
                        e.decision,
                        e.posterior.unwrap_or(f64::NAN),
                        e.evidence
                    )),
                }
            }
            out.push_str(&format!("{}/{} equations validated\n", report.validated(), satisfiable));
            Ok(out)
        }
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn check(ctx: &Context, profile_paths: &[PathBuf]) -> Result<String, Failure> {
    let pack = load_rulepack(&ctx.pack).map_err(Failure::integrity)?;
    let mut inputs = pack.digests.clone();
    let profiles = if profile_paths.is_empty() {
        pack.profiles.clone()
    } else {
        inputs.retain(|k, _| !k.starts_with("vehicles/"));
        let mut out = Vec::new();
        for p in profile_paths {
            let label = p.display().to_string();
            let bytes = std::fs::read(p).map_err(|e| Failure::io(&label, e))?;
            out.push(load_profile(p).map_err(|e| Failure::new(EXIT_PARSE, Some(&label), e.to_string()))?);
            inputs.insert(format!("profile/{}", file_name(p)), sha256_hex(&bytes));
        }
        out
    };
    let mut report = ComplianceReport::build(&pack, &profiles, &pack.scenarios, inputs).map_err(Failure::report)?;
    if ctx.timestamps {
        let now = time::OffsetDateTime::now_utc();
        report.generated_at = now.format(&time::format_description::well_known::Rfc3339).ok();
    }
    Ok(match ctx.format {
        Some(Format::Json) => report.to_json(),
        _ => report.to_text(ctx.ascii),
    })
}
