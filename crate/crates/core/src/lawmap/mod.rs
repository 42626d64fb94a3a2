//! Lawmaps: reduced ordered decision diagrams over a rule's condition
//! variables, with one outcome box per reachable decision set.

mod build;
mod export;

pub use build::{build_lawmap, trace_path};
pub use export::{export_dot, export_dot_traced, export_json, import_json};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const START_ID: &str = "start";
pub const SINK_ID: &str = "sink";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Start,
    Condition,
    Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawmapNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default)]
    pub var: Option<String>,
    /// Decisions that hold at this outcome; empty for the out-of-scope sink.
    #[serde(default)]
    pub decisions: Vec<String>,
}

impl LawmapNode {
    pub fn is_sink(&self) -> bool {
        self.kind == NodeKind::Outcome && self.decisions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Guard {
    Always,
    TrueBranch,
    FalseBranch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawmapEdge {
    pub from: String,
    pub to: String,
    pub guard: Guard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawmapGraph {
    pub rule_id: String,
    #[serde(default)]
    pub citations: Vec<String>,
    pub nodes: Vec<LawmapNode>,
    pub edges: Vec<LawmapEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawmapError {
    #[error("equations do not match the rule: {0}")]
    InconsistentInputs(String),
    #[error("scenario leaves condition variables unset: {}", .0.join(", "))]
    IncompleteAssignment(Vec<String>),
    #[error("too many condition variables for a decision diagram: {0}")]
    TooManyVariables(usize),
    #[error("invalid lawmap: {0}")]
    Invalid(String),
    #[error("lawmap JSON: {0}")]
    Json(String),
}

impl LawmapGraph {
    pub fn node(&self, id: &str) -> Option<&LawmapNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn out_edges<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a LawmapEdge> + 'a {
        self.edges.iter().filter(move |e| e.from == id)
    }

    fn branch<'a>(&'a self, id: &'a str, guard: Guard) -> Option<&'a str> {
        self.out_edges(id).find(|e| e.guard == guard).map(|e| e.to.as_str())
    }

    pub fn conditions(&self) -> impl Iterator<Item = &LawmapNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Condition)
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &LawmapNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Outcome)
    }

    /// Distinct condition variables, in first-test order.
    pub fn condition_vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.conditions()
            .filter_map(|n| n.var.clone())
            .filter(|v| seen.insert(v.clone()))
            .collect()
    }

    /// Every START-to-OUTCOME path as node ids.
    pub fn paths(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![START_ID.to_string()]];
        while let Some(path) = stack.pop() {
            let last = path.last().unwrap();
            let next: Vec<&str> = self.out_edges(last).map(|e| e.to.as_str()).collect();
            if next.is_empty() {
                out.push(path);
                continue;
            }
            for n in next.into_iter().rev() {
                let mut p = path.clone();
                p.push(n.to_string());
                stack.push(p);
            }
        }
        out
    }

    /// Checks the structural invariants: one START with ALWAYS edges only,
    /// two branches per CONDITION, no out-edges on OUTCOMEs, acyclic, all
    /// nodes reachable.
    pub fn validate(&self) -> Result<(), LawmapError> {
        let invalid = |m: String| Err(LawmapError::Invalid(m));
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return invalid(format!("duplicate node id `{}`", n.id));
            }
        }
        let starts: Vec<&LawmapNode> = self.nodes.iter().filter(|n| n.kind == NodeKind::Start).collect();
        if starts.len() != 1 || starts[0].id != START_ID {
            return invalid("exactly one START node with id `start` required".into());
        }
        if self.outcomes().next().is_none() {
            return invalid("no OUTCOME node".into());
        }
        for e in &self.edges {
            if !ids.contains(e.from.as_str()) || !ids.contains(e.to.as_str()) {
                return invalid(format!("edge {} -> {} references an unknown node", e.from, e.to));
            }
        }
        for n in &self.nodes {
            let guards: Vec<Guard> = self.out_edges(&n.id).map(|e| e.guard).collect();
            let ok = match n.kind {
                NodeKind::Start => !guards.is_empty() && guards.iter().all(|g| *g == Guard::Always),
                NodeKind::Condition => {
                    n.var.is_some()
                        && guards.len() == 2
                        && guards.contains(&Guard::TrueBranch)
                        && guards.contains(&Guard::FalseBranch)
                }
                NodeKind::Outcome => guards.is_empty(),
            };
            if !ok {
                return invalid(format!("node `{}` has malformed out-edges", n.id));
            }
        }
        // Kahn's algorithm doubles as the cycle check; reachability is a DFS from START.
        let mut indegree: BTreeMap<&str, usize> = self.nodes.iter().map(|n| (n.id.as_str(), 0)).collect();
        for e in &self.edges {
            *indegree.get_mut(e.to.as_str()).unwrap() += 1;
        }
        let mut queue: Vec<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut visited = 0;
        while let Some(id) = queue.pop() {
            visited += 1;
            for e in self.out_edges(id) {
                let d = indegree.get_mut(e.to.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push(e.to.as_str());
                }
            }
        }
        if visited != self.nodes.len() {
            return invalid("graph has a cycle".into());
        }
        let mut reach = BTreeSet::from([START_ID]);
        let mut stack = vec![START_ID];
        while let Some(id) = stack.pop() {
            for e in self.out_edges(id) {
                if reach.insert(e.to.as_str()) {
                    stack.push(e.to.as_str());
                }
            }
        }
        if let Some(n) = self.nodes.iter().find(|n| !reach.contains(n.id.as_str())) {
            return invalid(format!("node `{}` is unreachable from START", n.id));
        }
        Ok(())
    }
}
