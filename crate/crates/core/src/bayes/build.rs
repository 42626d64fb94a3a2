use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::boolean::{BoolError, BoolExpr, RuleEquations};

use super::{BayesNet, BnError, BnNode, BnNodeKind};

/// An operand feeding a CPT: parent slot and whether it enters negated.
type Operand = (String, bool);

struct Builder<'a> {
    eqs: &'a RuleEquations,
    folds: Vec<(BoolExpr, String)>,
    clause_ids: HashMap<BoolExpr, String>,
    nodes: Vec<BnNode>,
    fresh: usize,
}

impl Builder<'_> {
    fn operand(&mut self, e: &BoolExpr) -> Operand {
        match e {
            BoolExpr::Var(v) => (v.clone(), false),
            BoolExpr::Not(c) => {
                let (id, neg) = self.operand(c);
                (id, !neg)
            }
            _ => (self.clause(e), false),
        }
    }

    fn clause(&mut self, e: &BoolExpr) -> String {
        let key = e.normalize();
        if let Some(id) = self.clause_ids.get(&key) {
            return id.clone();
        }
        let (parents, cpt) = self.function(e);
        let named = self.folds.iter().find(|(f, _)| *f == key).map(|(_, id)| id.clone());
        let id = named.filter(|id| !self.nodes.iter().any(|n| &n.id == id)).unwrap_or_else(|| {
            self.fresh += 1;
            format!("{}.k{}", self.eqs.rule_id, self.fresh)
        });
        self.nodes.push(BnNode {
            id: id.clone(),
            kind: BnNodeKind::Clause,
            description: e.to_string(),
            parents,
            cpt,
        });
        self.clause_ids.insert(key, id.clone());
        id
    }

    /// Parents and deterministic CPT realizing `e` over its immediate operands.
    fn function(&mut self, e: &BoolExpr) -> (Vec<String>, Vec<[f64; 2]>) {
        let det = |b: bool| if b { [1.0, 0.0] } else { [0.0, 1.0] };
        let (is_and, children): (Option<bool>, Vec<BoolExpr>) = match e {
            BoolExpr::True => return (Vec::new(), vec![det(true)]),
            BoolExpr::False => return (Vec::new(), vec![det(false)]),
            BoolExpr::And(cs) => (Some(true), cs.clone()),
            BoolExpr::Or(cs) => (Some(false), cs.clone()),
            other => (None, vec![other.clone()]),
        };
        let ops: Vec<Operand> = children.iter().map(|c| self.operand(c)).collect();
        let mut parents: Vec<String> = Vec::new();
        for (id, _) in &ops {
            if !parents.contains(id) {
                parents.push(id.clone());
            }
        }
        let k = parents.len();
        let slots: Vec<(usize, bool)> = ops
            .iter()
            .map(|(id, neg)| (parents.iter().position(|p| p == id).unwrap(), *neg))
            .collect();
        let cpt = (0..1usize << k)
            .map(|row| {
                let value = |(slot, neg): &(usize, bool)| ((row >> (k - 1 - slot)) & 1 == 1) != *neg;
                let out = match is_and {
                    Some(true) => slots.iter().all(value),
                    Some(false) => slots.iter().any(value),
                    None => value(&slots[0]),
                };
                det(out)
            })
            .collect();
        (parents, cpt)
    }
}

/// Builds the network: a prior-carrying root per input variable, a clause
/// node per distinct compound sub-expression (named after the rule's clause
/// folds where one matches), and a decision node per equation. Decision
/// references become parent edges.
pub fn build_bn(eqs: &RuleEquations, priors: &BTreeMap<String, f64>) -> Result<BayesNet, BnError> {
    eqs.validate().map_err(|e| match e {
        BoolError::CyclicDefinition(d) => BnError::CyclicDefinition(d),
        other => BnError::Invalid(other.to_string()),
    })?;
    let inputs: BTreeSet<String> = eqs.input_vars().into_iter().collect();
    for (id, &value) in priors {
        if !inputs.contains(id) {
            return Err(BnError::UnknownNode(id.clone()));
        }
        if !(value > 0.0 && value < 1.0) {
            return Err(BnError::InvalidPrior { id: id.clone(), value });
        }
    }
    let mut b = Builder {
        eqs,
        folds: eqs.folds.iter().map(|f| (f.expr.normalize(), f.id.clone())).collect(),
        clause_ids: HashMap::new(),
        nodes: Vec::new(),
        fresh: 0,
    };
    for v in eqs.table.variables().iter().filter(|v| inputs.contains(&v.id)) {
        let p = priors.get(&v.id).copied().unwrap_or(0.5);
        b.nodes.push(BnNode {
            id: v.id.clone(),
            kind: BnNodeKind::FactRoot,
            description: v.description.clone(),
            parents: Vec::new(),
            cpt: vec![[p, 1.0 - p]],
        });
    }

    // decisions in dependency order so referenced decisions exist first
    let mut done: BTreeSet<String> = BTreeSet::new();
    let mut pending: Vec<&str> = eqs.decisions().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for d in pending {
            let expr = eqs.equation(d).unwrap();
            let ready = expr.vars().iter().all(|v| !eqs.table.is_decision(v) || done.contains(v));
            if !ready {
                rest.push(d);
                continue;
            }
            let (parents, cpt) = b.function(&expr.flatten());
            b.nodes.push(BnNode {
                id: d.to_string(),
                kind: BnNodeKind::Decision,
                description: eqs.table.get(d).map(|v| v.description.clone()).unwrap_or_default(),
                parents,
                cpt,
            });
            done.insert(d.to_string());
        }
        if rest.len() == before {
            return Err(BnError::CyclicDefinition(rest[0].to_string()));
        }
        pending = rest;
    }
    let net = BayesNet {
        rule_id: eqs.rule_id.clone(),
        nodes: b.nodes,
    };
    net.validate()?;
    Ok(net)
}
