use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::equations::RuleEquations;
use super::eval::{Assignment, IndexedExpr};
use super::expr::BoolExpr;
use super::BoolError;

/// Upper bound on input variables for exhaustive enumeration.
pub const MAX_TABLE_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub inputs: Vec<bool>,
    pub decisions: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    /// Input ids, sorted; the first id is the most significant bit of the row index.
    pub vars: Vec<String>,
    pub decisions: Vec<String>,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn assignment(&self, row: usize) -> Assignment {
        Assignment::from_bools(self.vars.iter().map(String::as_str).zip(self.rows[row].inputs.iter().copied()))
    }

    pub fn decision_index(&self, id: &str) -> Option<usize> {
        self.decisions.iter().position(|d| d == id)
    }

    /// Rows on which `decision` is true.
    pub fn count_true(&self, decision: &str) -> usize {
        let Some(i) = self.decision_index(decision) else { return 0 };
        self.rows.iter().filter(|r| r.decisions[i]).count()
    }
}

/// Bit `i` of row `k` for `n` variables, most significant first.
pub(crate) fn row_value(k: usize, i: usize, n: usize) -> bool {
    (k >> (n - 1 - i)) & 1 == 1
}

pub(crate) fn rows(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |k| (0..n).map(|i| row_value(k, i, n)).collect())
}

/// Enumerates all `2^n` input rows over the sorted input variables.
pub fn truth_table(eqs: &RuleEquations) -> Result<TruthTable, BoolError> {
    let vars = eqs.input_vars();
    let n = vars.len();
    if n > MAX_TABLE_VARS {
        return Err(BoolError::TooManyVariables(n));
    }
    let compiled = compile_all(eqs, &vars)?;
    let rows = rows(n)
        .map(|inputs| {
            let decisions = compiled.iter().map(|e| e.eval(&inputs)).collect();
            TruthRow { inputs, decisions }
        })
        .collect();
    Ok(TruthTable {
        vars,
        decisions: eqs.decisions().map(str::to_string).collect(),
        rows,
    })
}

fn compile_all(eqs: &RuleEquations, vars: &[String]) -> Result<Vec<IndexedExpr>, BoolError> {
    let index_of = |id: &str| vars.iter().position(|v| v == id).expect("input var indexed");
    eqs.expanded_all()?
        .iter()
        .map(|(_, e)| Ok(IndexedExpr::compile(e, &index_of)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairExclusivity {
    pub first: String,
    pub second: String,
    pub mutually_exclusive: bool,
    /// A row setting both decisions, when they overlap.
    pub witness: Option<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub pairs: Vec<PairExclusivity>,
    pub exhaustive_given_antecedent: bool,
    /// A row satisfying the antecedent on which no decision fires.
    pub exhaustive_witness: Option<Assignment>,
}

impl PropertyReport {
    pub fn all_mutually_exclusive(&self) -> bool {
        self.pairs.iter().all(|p| p.mutually_exclusive)
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairExclusivity> {
        self.pairs
            .iter()
            .find(|p| (p.first == a && p.second == b) || (p.first == b && p.second == a))
    }
}

/// Pairwise mutual exclusion and exhaustiveness over the full truth table.
///
/// Without a recorded antecedent the antecedent is taken as `true`.
pub fn check_properties(eqs: &RuleEquations) -> Result<PropertyReport, BoolError> {
    let table = truth_table(eqs)?;
    let antecedent = eqs.antecedent.clone().unwrap_or(BoolExpr::True);
    let index_of = |id: &str| table.vars.iter().position(|v| v == id).expect("antecedent var indexed");
    let antecedent = IndexedExpr::compile(&antecedent, &index_of);

    let mut pairs = Vec::new();
    for i in 0..table.decisions.len() {
        for j in i + 1..table.decisions.len() {
            let hit = table.rows.iter().position(|r| r.decisions[i] && r.decisions[j]);
            pairs.push(PairExclusivity {
                first: table.decisions[i].clone(),
                second: table.decisions[j].clone(),
                mutually_exclusive: hit.is_none(),
                witness: hit.map(|k| table.assignment(k)),
            });
        }
    }
    let gap = table
        .rows
        .iter()
        .position(|r| antecedent.eval(&r.inputs) && !r.decisions.iter().any(|d| *d));
    Ok(PropertyReport {
        pairs,
        exhaustive_given_antecedent: gap.is_none(),
        exhaustive_witness: gap.map(|k| table.assignment(k)),
    })
}

/// Truth-table equivalence of two expressions; returns the first distinguishing row.
pub fn expr_counterexample(a: &BoolExpr, b: &BoolExpr) -> Result<Option<Assignment>, BoolError> {
    let vars: Vec<String> = a.vars().union(&b.vars()).cloned().collect();
    if vars.len() > MAX_TABLE_VARS {
        return Err(BoolError::TooManyVariables(vars.len()));
    }
    let index_of = |id: &str| vars.iter().position(|v| v == id).unwrap();
    let (ca, cb) = (IndexedExpr::compile(a, &index_of), IndexedExpr::compile(b, &index_of));
    for inputs in rows(vars.len()) {
        if ca.eval(&inputs) != cb.eval(&inputs) {
            return Ok(Some(Assignment::from_bools(
                vars.iter().map(String::as_str).zip(inputs.iter().copied()),
            )));
        }
    }
    Ok(None)
}

/// Where two equation sets disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub decision: String,
    /// `None` when the decision is missing from one side.
    pub witness: Option<Assignment>,
}

/// Checks that both sets define the same decisions with truth-table-equivalent
/// (expanded) equations.
pub fn equations_equivalent(a: &RuleEquations, b: &RuleEquations) -> Result<Option<Mismatch>, BoolError> {
    let da: BTreeSet<&str> = a.decisions().collect();
    let db: BTreeSet<&str> = b.decisions().collect();
    if let Some(d) = da.symmetric_difference(&db).next() {
        return Ok(Some(Mismatch {
            decision: d.to_string(),
            witness: None,
        }));
    }
    for d in a.decisions() {
        let (ea, eb) = (a.expanded(d)?, b.expanded(d)?);
        if let Some(w) = expr_counterexample(&ea, &eb)? {
            return Ok(Some(Mismatch {
                decision: d.to_string(),
                witness: Some(w),
            }));
        }
    }
    Ok(None)
}
