//! Structured-English road rules compiled to Boolean equations, rendered as
//! decision diagrams ("Lawmaps"), cross-checked with deterministic Bayesian
//! networks and rated against vehicle capability profiles.

pub mod boolean;
pub mod rule_dsl;
pub mod lawmap;
pub mod bayes;
pub mod rulepack;
pub mod report;
