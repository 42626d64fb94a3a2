use std::collections::{BTreeSet, HashMap};

use crate::boolean::{rows, Assignment, IndexedExpr, RuleEquations, Truth, MAX_TABLE_VARS};
use crate::rule_dsl::RuleAst;

use super::{Guard, LawmapEdge, LawmapError, LawmapGraph, LawmapNode, NodeKind, SINK_ID, START_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Ref {
    Terminal(usize),
    Cond(usize),
}

struct Cond {
    level: usize,
    hi: Ref,
    lo: Ref,
}

/// Input variables in clause document order: IF, EXCEPT, then outcome guards.
fn variable_order(eqs: &RuleEquations, ast: &RuleAst) -> Result<Vec<String>, LawmapError> {
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    let mut outcome_paths = BTreeSet::new();
    ast.walk(|path, _, section, depth| {
        if let Some(id) = eqs.table.binding(path) {
            if section.is_outcome() && depth == 0 {
                outcome_paths.insert(id.to_string());
            } else if seen.insert(id.to_string()) {
                order.push(id.to_string());
            }
        }
    });
    for d in eqs.decisions() {
        if !outcome_paths.contains(d) {
            return Err(LawmapError::InconsistentInputs(format!("decision `{d}` is not an outcome of the rule")));
        }
    }
    for v in eqs.input_vars() {
        if !seen.contains(&v) {
            return Err(LawmapError::InconsistentInputs(format!("variable `{v}` is not bound to a clause")));
        }
    }
    let used: BTreeSet<String> = eqs.input_vars().into_iter().collect();
    order.retain(|v| used.contains(v));
    Ok(order)
}

/// Builds the reduced ordered decision diagram for `eqs`, testing variables in
/// the clause order of `ast`. A level is skipped when both branches agree.
pub fn build_lawmap(eqs: &RuleEquations, ast: &RuleAst) -> Result<LawmapGraph, LawmapError> {
    if ast.rule_id != eqs.rule_id {
        return Err(LawmapError::InconsistentInputs(format!(
            "rule `{}` vs equations `{}`",
            ast.rule_id, eqs.rule_id
        )));
    }
    let order = variable_order(eqs, ast)?;
    let n = order.len();
    if n > MAX_TABLE_VARS {
        return Err(LawmapError::TooManyVariables(n));
    }
    let index_of = |id: &str| order.iter().position(|v| v == id).expect("ordered var");
    let expanded = eqs
        .expanded_all()
        .map_err(|e| LawmapError::InconsistentInputs(e.to_string()))?;
    let compiled: Vec<IndexedExpr> = expanded.iter().map(|(_, e)| IndexedExpr::compile(e, &index_of)).collect();
    let decisions: Vec<String> = expanded.iter().map(|(d, _)| d.clone()).collect();

    // terminal index per complete assignment, first ordered variable most significant
    let mut terminals: Vec<Vec<bool>> = Vec::new();
    let mut term_index: HashMap<Vec<bool>, usize> = HashMap::new();
    let table: Vec<usize> = rows(n)
        .map(|inputs| {
            let set: Vec<bool> = compiled.iter().map(|e| e.eval(&inputs)).collect();
            let next = terminals.len();
            *term_index.entry(set.clone()).or_insert_with(|| {
                terminals.push(set);
                next
            })
        })
        .collect();

    let mut conds: Vec<Cond> = Vec::new();
    let mut memo: HashMap<&[usize], Ref> = HashMap::new();
    let root = reduce(&table, 0, &mut conds, &mut memo);

    // number conditions in pre-order, true branch first
    let mut numbering: Vec<Option<usize>> = vec![None; conds.len()];
    let mut next_id = 1;
    let mut used_terminals = Vec::new();
    let mut stack = vec![root];
    let mut visit_order = Vec::new();
    while let Some(r) = stack.pop() {
        match r {
            Ref::Cond(c) => {
                if numbering[c].is_none() {
                    numbering[c] = Some(next_id);
                    next_id += 1;
                    visit_order.push(c);
                    stack.push(conds[c].lo);
                    stack.push(conds[c].hi);
                }
            }
            Ref::Terminal(t) => {
                if !used_terminals.contains(&t) {
                    used_terminals.push(t);
                }
            }
        }
    }

    let term_id = |t: usize| -> String {
        let ds: Vec<&str> = decisions
            .iter()
            .zip(&terminals[t])
            .filter(|(_, on)| **on)
            .map(|(d, _)| d.as_str())
            .collect();
        if ds.is_empty() {
            SINK_ID.to_string()
        } else {
            format!("o:{}", ds.join("+"))
        }
    };
    let ref_id = |r: Ref| match r {
        Ref::Cond(c) => format!("c{}", numbering[c].unwrap()),
        Ref::Terminal(t) => term_id(t),
    };
    let describe = |id: &str| eqs.table.get(id).map(|v| v.description.clone()).unwrap_or_default();

    let mut nodes = vec![LawmapNode {
        id: START_ID.to_string(),
        kind: NodeKind::Start,
        label: ast.rule_id.clone(),
        var: None,
        decisions: Vec::new(),
    }];
    let mut edges = vec![LawmapEdge {
        from: START_ID.to_string(),
        to: ref_id(root),
        guard: Guard::Always,
    }];
    for &c in &visit_order {
        let var = &order[conds[c].level];
        let id = ref_id(Ref::Cond(c));
        nodes.push(LawmapNode {
            id: id.clone(),
            kind: NodeKind::Condition,
            label: describe(var),
            var: Some(var.clone()),
            decisions: Vec::new(),
        });
        edges.push(LawmapEdge {
            from: id.clone(),
            to: ref_id(conds[c].hi),
            guard: Guard::TrueBranch,
        });
        edges.push(LawmapEdge {
            from: id,
            to: ref_id(conds[c].lo),
            guard: Guard::FalseBranch,
        });
    }
    let mut outcome_nodes: Vec<LawmapNode> = used_terminals
        .iter()
        .map(|&t| {
            let ds: Vec<String> = decisions
                .iter()
                .zip(&terminals[t])
                .filter(|(_, on)| **on)
                .map(|(d, _)| d.clone())
                .collect();
            let label = if ds.is_empty() {
                "out of scope".to_string()
            } else {
                ds.iter().map(|d| describe(d)).collect::<Vec<_>>().join("; ")
            };
            LawmapNode {
                id: term_id(t),
                kind: NodeKind::Outcome,
                label,
                var: None,
                decisions: ds,
            }
        })
        .collect();
    // outcome boxes in equation order, sink last
    let rank = |n: &LawmapNode| {
        n.decisions
            .first()
            .and_then(|d| decisions.iter().position(|x| x == d))
            .unwrap_or(usize::MAX)
    };
    outcome_nodes.sort_by_key(|n| (rank(n), n.decisions.len()));
    nodes.extend(outcome_nodes);

    let graph = LawmapGraph {
        rule_id: ast.rule_id.clone(),
        citations: Vec::new(),
        nodes,
        edges,
    };
    graph.validate()?;
    Ok(graph)
}

fn reduce<'a>(table: &'a [usize], level: usize, conds: &mut Vec<Cond>, memo: &mut HashMap<&'a [usize], Ref>) -> Ref {
    if table.iter().all(|t| *t == table[0]) {
        return Ref::Terminal(table[0]);
    }
    if let Some(r) = memo.get(table) {
        return *r;
    }
    let half = table.len() / 2;
    let (lo_t, hi_t) = table.split_at(half);
    let r = if lo_t == hi_t {
        reduce(lo_t, level + 1, conds, memo)
    } else {
        let lo = reduce(lo_t, level + 1, conds, memo);
        let hi = reduce(hi_t, level + 1, conds, memo);
        conds.push(Cond { level, hi, lo });
        Ref::Cond(conds.len() - 1)
    };
    memo.insert(table, r);
    r
}

/// Follows the branches chosen by `asg` from START to an outcome.
pub fn trace_path(g: &LawmapGraph, asg: &Assignment) -> Result<Vec<String>, LawmapError> {
    let mut path = vec![START_ID.to_string()];
    let mut current = g
        .branch(START_ID, Guard::Always)
        .ok_or_else(|| LawmapError::Invalid("START has no out-edge".into()))?
        .to_string();
    loop {
        path.push(current.clone());
        let node = g
            .node(&current)
            .ok_or_else(|| LawmapError::Invalid(format!("unknown node `{current}`")))?;
        if node.kind != NodeKind::Condition {
            return Ok(path);
        }
        let var = node.var.as_deref().unwrap_or_default();
        let guard = match asg.get(var) {
            Truth::True => Guard::TrueBranch,
            Truth::False => Guard::FalseBranch,
            Truth::Unknown => {
                let missing = g.condition_vars().into_iter().filter(|v| asg.get(v) == Truth::Unknown).collect();
                return Err(LawmapError::IncompleteAssignment(missing));
            }
        };
        current = g
            .branch(&current, guard)
            .ok_or_else(|| LawmapError::Invalid(format!("node `{current}` lacks a branch")))?
            .to_string();
    }
}

impl LawmapGraph {
    /// Attaches statute references shown as graph metadata.
    pub fn with_citations(mut self, citations: &[String]) -> Self {
        self.citations = citations.to_vec();
        self
    }
}
