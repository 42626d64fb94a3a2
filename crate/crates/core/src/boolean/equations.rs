use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::expr::{BoolExpr, Symbols};
use super::BoolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VariableKind {
    /// A fact about the actors (occupant age, vehicle type).
    Factual,
    /// A contextual condition (seat belt fitted, crossing clear).
    Situation,
    /// A rule outcome.
    Decision,
}

impl VariableKind {
    pub fn is_input(self) -> bool {
        self != VariableKind::Decision
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: String,
    pub kind: VariableKind,
    pub description: String,
}

/// Variables of one rule plus the clause paths they were bound to.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableTable {
    variables: Vec<Variable>,
    /// clause path (`IF.A.b`) -> variable id
    bindings: BTreeMap<String, String>,
}

impl VariableTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable; an id already present with the same kind is left untouched.
    pub fn insert(&mut self, var: Variable) -> Result<(), BoolError> {
        if let Some(existing) = self.get(&var.id) {
            if existing.kind.is_input() != var.kind.is_input() {
                return Err(BoolError::KindConflict(var.id));
            }
            return Ok(());
        }
        self.variables.push(var);
        Ok(())
    }

    pub fn bind(&mut self, path: impl Into<String>, id: impl Into<String>) {
        self.bindings.insert(path.into(), id.into());
    }

    pub fn binding(&self, path: &str) -> Option<&str> {
        self.bindings.get(path).map(String::as_str)
    }

    pub fn bindings(&self) -> &BTreeMap<String, String> {
        &self.bindings
    }

    pub fn get(&self, id: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn of_kind(&self, kind: VariableKind) -> impl Iterator<Item = &Variable> {
        self.variables.iter().filter(move |v| v.kind == kind)
    }

    pub fn is_decision(&self, id: &str) -> bool {
        self.get(id).is_some_and(|v| v.kind == VariableKind::Decision)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub decision: String,
    pub expr: BoolExpr,
}

/// A named intermediate clause fold (e.g. the `[A] Vehicle occupant is: …` disjunction).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedFold {
    pub id: String,
    pub label: String,
    pub expr: BoolExpr,
}

/// The equation set of one rule: one equation per decision variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEquations {
    pub rule_id: String,
    pub table: VariableTable,
    pub equations: Vec<Equation>,
    /// Antecedent fold, when the equations were compiled from a rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent: Option<BoolExpr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<NamedFold>,
}

impl RuleEquations {
    /// Validates that every decision has exactly one equation, every referenced
    /// id resolves, and decision references are acyclic.
    pub fn new(rule_id: impl Into<String>, table: VariableTable, equations: Vec<Equation>) -> Result<Self, BoolError> {
        let eqs = RuleEquations {
            rule_id: rule_id.into(),
            table,
            equations,
            antecedent: None,
            folds: Vec::new(),
        };
        eqs.validate()?;
        Ok(eqs)
    }

    pub fn validate(&self) -> Result<(), BoolError> {
        let mut seen = BTreeSet::new();
        for eq in &self.equations {
            if !self.table.is_decision(&eq.decision) {
                return Err(BoolError::NotADecision(eq.decision.clone()));
            }
            if !seen.insert(eq.decision.as_str()) {
                return Err(BoolError::DuplicateEquation(eq.decision.clone()));
            }
            for v in eq.expr.vars() {
                if !self.table.contains(&v) {
                    return Err(BoolError::UnboundVariable(v));
                }
            }
        }
        for d in self.table.of_kind(VariableKind::Decision) {
            if !seen.contains(d.id.as_str()) {
                return Err(BoolError::MissingEquation(d.id.clone()));
            }
        }
        for eq in &self.equations {
            self.expanded(&eq.decision)?;
        }
        Ok(())
    }

    pub fn equation(&self, decision: &str) -> Option<&BoolExpr> {
        self.equations.iter().find(|e| e.decision == decision).map(|e| &e.expr)
    }

    pub fn decisions(&self) -> impl Iterator<Item = &str> {
        self.equations.iter().map(|e| e.decision.as_str())
    }

    /// The decision's equation with decision references substituted away.
    pub fn expanded(&self, decision: &str) -> Result<BoolExpr, BoolError> {
        let mut stack = Vec::new();
        self.expand_inner(decision, &mut stack)
    }

    fn expand_inner(&self, decision: &str, stack: &mut Vec<String>) -> Result<BoolExpr, BoolError> {
        if stack.iter().any(|d| d == decision) {
            return Err(BoolError::CyclicDefinition(decision.to_string()));
        }
        let expr = self
            .equation(decision)
            .ok_or_else(|| BoolError::MissingEquation(decision.to_string()))?;
        stack.push(decision.to_string());
        let refs: Vec<String> = expr.vars().into_iter().filter(|v| self.table.is_decision(v)).collect();
        let mut subs = BTreeMap::new();
        for r in refs {
            subs.insert(r.clone(), self.expand_inner(&r, stack)?);
        }
        stack.pop();
        Ok(expr.substitute(|v| subs.get(v).cloned()))
    }

    /// All equations expanded, in equation order.
    pub fn expanded_all(&self) -> Result<Vec<(String, BoolExpr)>, BoolError> {
        self.equations
            .iter()
            .map(|e| Ok((e.decision.clone(), self.expanded(&e.decision)?)))
            .collect()
    }

    /// Input (factual/situation) variables reachable from the equations, sorted by id.
    pub fn input_vars(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for eq in &self.equations {
            if let Ok(e) = self.expanded(&eq.decision) {
                out.extend(e.vars());
            }
        }
        if let Some(a) = &self.antecedent {
            out.extend(a.vars());
        }
        out.into_iter().filter(|v| !self.table.is_decision(v)).collect()
    }

    /// `decision = expr` lines, byte-stable.
    pub fn to_text(&self, symbols: Symbols) -> String {
        let mut out = String::new();
        for eq in &self.equations {
            out.push_str(&eq.decision);
            out.push_str(" = ");
            out.push_str(&eq.expr.display(symbols).to_string());
            out.push('\n');
        }
        out
    }

    /// Equations with every expression normalized.
    pub fn normalized(&self) -> RuleEquations {
        let mut out = self.clone();
        for eq in &mut out.equations {
            eq.expr = eq.expr.normalize();
        }
        out
    }

    /// Unions several rules' equation sets into one (e.g. a composite rule bundle).
    pub fn merge(rule_id: impl Into<String>, parts: &[RuleEquations]) -> Result<RuleEquations, BoolError> {
        let mut table = VariableTable::new();
        let mut equations = Vec::new();
        let mut folds = Vec::new();
        for part in parts {
            for v in part.table.variables() {
                if let Some(existing) = table.get(&v.id) {
                    if existing.kind == VariableKind::Decision || v.kind == VariableKind::Decision {
                        return Err(BoolError::KindConflict(v.id.clone()));
                    }
                }
                table.insert(v.clone())?;
            }
            for (p, id) in part.table.bindings() {
                table.bind(format!("{}:{}", part.rule_id, p), id.clone());
            }
            equations.extend(part.equations.iter().cloned());
            folds.extend(part.folds.iter().cloned());
        }
        let antecedent = parts
            .iter()
            .map(|p| p.antecedent.clone())
            .collect::<Option<Vec<_>>>()
            .map(BoolExpr::or);
        let mut merged = RuleEquations::new(rule_id, table, equations)?;
        merged.antecedent = antecedent;
        merged.folds = folds;
        Ok(merged)
    }
}
