use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boolean::{eval_kleene, rows, Assignment, IndexedExpr, RuleEquations, Truth, MAX_TABLE_VARS};

use super::infer::{infer_with, Evidence, InferenceMethod};
use super::{BayesNet, BnError, BnNodeKind};

const TOLERANCE: f64 = 1e-9;

/// A decision whose posterior disagrees with Boolean evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub decision: String,
    pub evidence: Assignment,
    pub expected: bool,
    /// `None` when the evidence was impossible under the net or the node is missing.
    pub posterior: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EquationStatus {
    Validated,
    Failed,
    /// No assignment makes the decision true (e.g. a THEN outcome without exception).
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub decision: String,
    /// Partial assignment that forces the decision, instantiated as evidence.
    pub evidence: Assignment,
    pub posterior: Option<f64>,
    pub status: EquationStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rule_id: String,
    pub evidence_sets: usize,
    pub agreeing_sets: usize,
    pub divergences: Vec<Divergence>,
    pub equations: Vec<EquationCheck>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.divergences.is_empty() && self.equations.iter().all(|e| e.status != EquationStatus::Failed)
    }

    pub fn validated(&self) -> usize {
        self.equations.iter().filter(|e| e.status == EquationStatus::Validated).count()
    }
}

fn to_evidence(asg: &Assignment) -> Evidence {
    asg.iter().filter_map(|(k, t)| t.as_bool().map(|b| (k.to_string(), b))).collect()
}

/// Exhaustive check over every complete fact-root evidence set, then a
/// per-equation check instantiating a minimal forcing assignment.
pub fn validate_bn(net: &BayesNet, eqs: &RuleEquations) -> Result<ValidationReport, BnError> {
    let mut roots: Vec<String> = net.roots().map(|n| n.id.clone()).collect();
    roots.sort();
    if roots.len() > MAX_TABLE_VARS {
        return Err(BnError::TooManyVariables(roots.len()));
    }
    let inputs = eqs.input_vars();
    let expanded = eqs.expanded_all().map_err(|e| BnError::Invalid(e.to_string()))?;
    let index_of = |id: &str| roots.iter().position(|r| r == id);
    for v in &inputs {
        if index_of(v).is_none() {
            return Err(BnError::UnknownNode(v.clone()));
        }
    }
    let compiled: Vec<IndexedExpr> = expanded
        .iter()
        .map(|(_, e)| IndexedExpr::compile(e, &|id| index_of(id).unwrap()))
        .collect();

    let mut divergences = Vec::new();
    let mut agreeing = 0;
    let total = 1usize << roots.len();
    for values in rows(roots.len()) {
        let asg = Assignment::from_bools(roots.iter().map(String::as_str).zip(values.iter().copied()));
        let posts = infer_with(net, &to_evidence(&asg), InferenceMethod::Enumeration);
        let mut agree = true;
        for ((d, _), e) in expanded.iter().zip(&compiled) {
            let expected = e.eval(&values);
            let post = posts.as_ref().ok().and_then(|p| p.get(d).copied());
            let ok = post.is_some_and(|p| (p - if expected { 1.0 } else { 0.0 }).abs() <= TOLERANCE);
            if !ok {
                agree = false;
                divergences.push(Divergence {
                    decision: d.clone(),
                    evidence: asg.clone(),
                    expected,
                    posterior: post,
                });
            }
        }
        if agree {
            agreeing += 1;
        }
    }

    let mut equations = Vec::new();
    for ((d, e), c) in expanded.iter().zip(&compiled) {
        let sat = rows(roots.len()).find(|values| c.eval(values));
        let Some(values) = sat else {
            equations.push(EquationCheck {
                decision: d.clone(),
                evidence: Assignment::new(),
                posterior: None,
                status: EquationStatus::Unsatisfiable,
            });
            continue;
        };
        // keep only the variables the decision needs to stay forced true
        let mut asg: BTreeMap<String, Truth> = inputs
            .iter()
            .map(|v| (v.clone(), Truth::from(values[index_of(v).unwrap()])))
            .collect();
        for v in &inputs {
            let saved = asg.insert(v.clone(), Truth::Unknown).unwrap();
            if eval_kleene(e, |id| asg.get(id).copied().unwrap_or(Truth::Unknown)) != Truth::True {
                asg.insert(v.clone(), saved);
            }
        }
        asg.retain(|_, t| *t != Truth::Unknown);
        let evidence = Assignment(asg);
        let post = infer_with(net, &to_evidence(&evidence), InferenceMethod::Auto)
            .ok()
            .and_then(|p| p.get(d).copied());
        let ok = post.is_some_and(|p| (p - 1.0).abs() <= TOLERANCE)
            && net.node(d).is_some_and(|n| n.kind == BnNodeKind::Decision);
        equations.push(EquationCheck {
            decision: d.clone(),
            evidence,
            posterior: post,
            status: if ok { EquationStatus::Validated } else { EquationStatus::Failed },
        });
    }

    Ok(ValidationReport {
        rule_id: net.rule_id.clone(),
        evidence_sets: total,
        agreeing_sets: agreeing,
        divergences,
        equations,
    })
}
