use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::equations::RuleEquations;
use super::expr::BoolExpr;

/// Kleene three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl std::ops::Not for Truth {
    type Output = Truth;

    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

impl Truth {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "TRUE",
            Truth::False => "FALSE",
            Truth::Unknown => "UNKNOWN",
        })
    }
}

/// Input valuation; ids absent from the map are `Unknown`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<String, Truth>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, id: impl Into<String>, value: impl Into<Truth>) -> &mut Self {
        self.0.insert(id.into(), value.into());
        self
    }

    pub fn with(mut self, id: impl Into<String>, value: impl Into<Truth>) -> Self {
        self.set(id, value);
        self
    }

    pub fn get(&self, id: &str) -> Truth {
        self.0.get(id).copied().unwrap_or(Truth::Unknown)
    }

    pub fn from_bools<'a>(pairs: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        Assignment(pairs.into_iter().map(|(k, v)| (k.to_string(), Truth::from(v))).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.values().all(|t| *t == Truth::Unknown)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Truth)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let short = match v {
                Truth::True => "T",
                Truth::False => "F",
                Truth::Unknown => "?",
            };
            write!(f, "{k}:{short}")?;
        }
        f.write_str("}")
    }
}

/// Kleene evaluation of `expr`; `lookup` resolves every variable.
pub fn eval_kleene<F: Fn(&str) -> Truth + Copy>(expr: &BoolExpr, lookup: F) -> Truth {
    match expr {
        BoolExpr::True => Truth::True,
        BoolExpr::False => Truth::False,
        BoolExpr::Var(v) => lookup(v),
        BoolExpr::Not(c) => !eval_kleene(c, lookup),
        BoolExpr::And(cs) => {
            let mut acc = Truth::True;
            for c in cs {
                match eval_kleene(c, lookup) {
                    Truth::False => return Truth::False,
                    Truth::Unknown => acc = Truth::Unknown,
                    Truth::True => {}
                }
            }
            acc
        }
        BoolExpr::Or(cs) => {
            let mut acc = Truth::False;
            for c in cs {
                match eval_kleene(c, lookup) {
                    Truth::True => return Truth::True,
                    Truth::Unknown => acc = Truth::Unknown,
                    Truth::False => {}
                }
            }
            acc
        }
    }
}

/// Evaluates every decision under `asg` using Kleene logic.
///
/// Decision references are resolved through their own equations; missing
/// inputs are `Unknown`.
pub fn evaluate(eqs: &RuleEquations, asg: &Assignment) -> BTreeMap<String, Truth> {
    let mut memo: BTreeMap<String, Truth> = BTreeMap::new();
    for eq in &eqs.equations {
        let t = eval_decision(eqs, &eq.decision, asg, &mut memo, 0);
        memo.insert(eq.decision.clone(), t);
    }
    memo
}

fn eval_decision(
    eqs: &RuleEquations,
    decision: &str,
    asg: &Assignment,
    memo: &mut BTreeMap<String, Truth>,
    depth: usize,
) -> Truth {
    if let Some(t) = memo.get(decision) {
        return *t;
    }
    // RuleEquations::validate rejects cycles; the depth guard covers unvalidated sets.
    if depth > eqs.equations.len() {
        return Truth::Unknown;
    }
    let Some(expr) = eqs.equation(decision) else {
        return Truth::Unknown;
    };
    let refs: Vec<String> = expr.vars().into_iter().filter(|v| eqs.table.is_decision(v)).collect();
    for r in refs {
        let t = eval_decision(eqs, &r, asg, memo, depth + 1);
        memo.insert(r, t);
    }
    let snapshot = memo.clone();
    let t = eval_kleene(expr, |v| snapshot.get(v).copied().unwrap_or_else(|| asg.get(v)));
    memo.insert(decision.to_string(), t);
    t
}

/// Expression with variables resolved to input positions, for fast total evaluation.
#[derive(Debug, Clone)]
pub(crate) enum IndexedExpr {
    Const(bool),
    Var(usize),
    Not(Box<IndexedExpr>),
    And(Vec<IndexedExpr>),
    Or(Vec<IndexedExpr>),
}

impl IndexedExpr {
    pub(crate) fn compile(expr: &BoolExpr, index_of: &dyn Fn(&str) -> usize) -> IndexedExpr {
        match expr {
            BoolExpr::True => IndexedExpr::Const(true),
            BoolExpr::False => IndexedExpr::Const(false),
            BoolExpr::Var(v) => IndexedExpr::Var(index_of(v)),
            BoolExpr::Not(c) => IndexedExpr::Not(Box::new(Self::compile(c, index_of))),
            BoolExpr::And(cs) => IndexedExpr::And(cs.iter().map(|c| Self::compile(c, index_of)).collect()),
            BoolExpr::Or(cs) => IndexedExpr::Or(cs.iter().map(|c| Self::compile(c, index_of)).collect()),
        }
    }

    pub(crate) fn eval(&self, values: &[bool]) -> bool {
        match self {
            IndexedExpr::Const(b) => *b,
            IndexedExpr::Var(i) => values[*i],
            IndexedExpr::Not(c) => !c.eval(values),
            IndexedExpr::And(cs) => cs.iter().all(|c| c.eval(values)),
            IndexedExpr::Or(cs) => cs.iter().any(|c| c.eval(values)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule3() -> RuleEquations {
        RuleEquations::from_text("r3", "C = (u | v | w) & p\nF = (u | v | w) & !p & x\n", None).unwrap()
    }

    #[test]
    fn kleene_forcing() {
        let eqs = RuleEquations::from_text("r1", "B = (q | (r | s)) & y\nD = (q | (r | s)) & !y\n", None).unwrap();
        let asg = Assignment::from_bools([("q", false), ("r", false), ("s", false)]);
        let out = evaluate(&eqs, &asg);
        assert_eq!(out["B"], Truth::False);
        assert_eq!(out["D"], Truth::False);
    }

    #[test]
    fn unknown_situation_propagates() {
        let asg = Assignment::new().with("u", true).with("p", Truth::Unknown).with("x", true);
        let out = evaluate(&rule3(), &asg);
        assert_eq!(out["C"], Truth::Unknown);
        assert_eq!(out["F"], Truth::Unknown);
    }

    #[test]
    fn decision_reference_is_evaluated() {
        let eqs = RuleEquations::from_text("r", "E = t & !z\nF = E & x\n", None).unwrap();
        let asg = Assignment::from_bools([("t", true), ("z", false), ("x", true)]);
        let out = evaluate(&eqs, &asg);
        assert_eq!(out["E"], Truth::True);
        assert_eq!(out["F"], Truth::True);
    }
}
