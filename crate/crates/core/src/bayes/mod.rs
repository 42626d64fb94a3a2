//! Discrete Bayesian networks with deterministic CPTs mirroring rule
//! equations, exact inference, and validation against Boolean evaluation.

mod build;
mod infer;
mod validate;

pub use build::build_bn;
pub use infer::{infer, infer_distribution, infer_with, Evidence, InferenceMethod, ENUMERATION_MAX_ROOTS};
pub use validate::{validate_bn, Divergence, EquationCheck, EquationStatus, ValidationReport};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BnNodeKind {
    FactRoot,
    Clause,
    Decision,
}

/// A binary node. `cpt[row] = [P(true), P(false)]`, where `row` reads the
/// parents as bits, first parent most significant, `1` = true. Roots have a
/// single row holding the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnNode {
    pub id: String,
    pub kind: BnNodeKind,
    #[serde(default)]
    pub description: String,
    pub parents: Vec<String>,
    pub cpt: Vec<[f64; 2]>,
}

impl BnNode {
    pub fn prior(&self) -> Option<f64> {
        (self.kind == BnNodeKind::FactRoot).then(|| self.cpt[0][0])
    }
}

/// Nodes are stored in topological order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    pub rule_id: String,
    pub nodes: Vec<BnNode>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnError {
    #[error("decision `{0}` is defined in terms of itself")]
    CyclicDefinition(String),
    #[error("prior for `{id}` must lie strictly between 0 and 1, got {value}")]
    InvalidPrior { id: String, value: f64 },
    #[error("no node `{0}` in the network")]
    UnknownNode(String),
    #[error("evidence has zero probability")]
    ImpossibleEvidence,
    #[error("too many fact roots for exhaustive validation: {0}")]
    TooManyVariables(usize),
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("network JSON: {0}")]
    Json(String),
}

impl BayesNet {
    pub fn node(&self, id: &str) -> Option<&BnNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn roots(&self) -> impl Iterator<Item = &BnNode> {
        self.nodes.iter().filter(|n| n.kind == BnNodeKind::FactRoot)
    }

    pub fn of_kind(&self, kind: BnNodeKind) -> impl Iterator<Item = &BnNode> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    /// `(parent, child)` pairs.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.nodes
            .iter()
            .flat_map(|n| n.parents.iter().map(move |p| (p.clone(), n.id.clone())))
            .collect()
    }

    /// Structural checks: unique ids, parents defined earlier (hence acyclic),
    /// one CPT row per parent combination, rows summing to 1.
    pub fn validate(&self) -> Result<(), BnError> {
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            for p in &n.parents {
                if !seen.contains(p.as_str()) {
                    return Err(BnError::Invalid(format!(
                        "parent `{p}` of `{}` is missing or not earlier in topological order",
                        n.id
                    )));
                }
            }
            if !seen.insert(n.id.as_str()) {
                return Err(BnError::Invalid(format!("duplicate node `{}`", n.id)));
            }
            if n.parents.iter().collect::<BTreeSet<_>>().len() != n.parents.len() {
                return Err(BnError::Invalid(format!("node `{}` lists a parent twice", n.id)));
            }
            if n.kind == BnNodeKind::FactRoot && !n.parents.is_empty() {
                return Err(BnError::Invalid(format!("fact root `{}` has parents", n.id)));
            }
            if n.cpt.len() != 1 << n.parents.len() {
                return Err(BnError::Invalid(format!(
                    "node `{}` needs {} CPT rows, has {}",
                    n.id,
                    1usize << n.parents.len(),
                    n.cpt.len()
                )));
            }
            for row in &n.cpt {
                let ok = row.iter().all(|p| (0.0..=1.0).contains(p)) && (row[0] + row[1] - 1.0).abs() <= 1e-12;
                if !ok {
                    return Err(BnError::Invalid(format!("CPT row of `{}` is not a distribution", n.id)));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("net serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<BayesNet, BnError> {
        let net: BayesNet = serde_json::from_str(text).map_err(|e| BnError::Json(e.to_string()))?;
        net.validate()?;
        Ok(net)
    }
}
