//! Scenario files and compliance reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boolean::{evaluate, Assignment, RuleEquations, Symbols, Truth};
use crate::rulepack::{rate, Answer, CapabilityProfile, RagRating, Rulepack, RulepackError};

pub const TOOL_NAME: &str = "lexroad";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("scenario JSON: {0}")]
    Json(String),
    #[error("scenario is for `{scenario}`, rule is `{rule}`")]
    WrongRule { scenario: String, rule: String },
    #[error("`{0}` is not an input variable of the rule")]
    UnknownVariable(String),
}

/// Input facts for one rule. Absent variables are unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub rule_id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub facts: BTreeMap<String, bool>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))
    }

    /// Checks ids against the rule's inputs and builds the assignment.
    pub fn assignment(&self, eqs: &RuleEquations) -> Result<Assignment, ScenarioError> {
        if self.rule_id != eqs.rule_id {
            return Err(ScenarioError::WrongRule {
                scenario: self.rule_id.clone(),
                rule: eqs.rule_id.clone(),
            });
        }
        let inputs = eqs.input_vars();
        for id in self.facts.keys() {
            if !inputs.contains(id) {
                return Err(ScenarioError::UnknownVariable(id.clone()));
            }
        }
        Ok(Assignment::from_bools(self.facts.iter().map(|(k, v)| (k.as_str(), *v))))
    }

    /// Decision values in equation order.
    pub fn evaluate(&self, eqs: &RuleEquations) -> Result<Vec<(String, Truth)>, ScenarioError> {
        let values = evaluate(eqs, &self.assignment(eqs)?);
        Ok(eqs.decisions().map(|d| (d.to_string(), values[d])).collect())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub description: String,
    pub decisions: BTreeMap<String, Truth>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule_id: String,
    pub title: String,
    pub citations: Vec<String>,
    pub equations: Vec<String>,
    pub scenarios: Vec<ScenarioOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementRow {
    pub id: String,
    pub rule_group: String,
    pub description: String,
    pub hardware_gap: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleResult {
    pub vehicle_id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sae_level: Option<u8>,
    pub answers: BTreeMap<String, Answer>,
    pub ratings: Vec<RagRating>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub tool: ToolInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    /// Input file name → SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub requirements: Vec<RequirementRow>,
    pub vehicles: Vec<VehicleResult>,
    pub rules: Vec<RuleOutcome>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Rulepack(#[from] RulepackError),
    #[error("scenario `{name}`: {error}")]
    Scenario { name: String, error: ScenarioError },
}

/// A scenario with the name it is reported under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedScenario {
    pub name: String,
    pub scenario: ScenarioFile,
}

impl ComplianceReport {
    /// Rates every profile against every checklist and evaluates the scenarios
    /// against their rules. `inputs` holds the digests to embed.
    pub fn build(
        pack: &Rulepack,
        profiles: &[CapabilityProfile],
        scenarios: &[NamedScenario],
        inputs: BTreeMap<String, String>,
    ) -> Result<ComplianceReport, ReportError> {
        let requirements = pack
            .checklists
            .iter()
            .flat_map(|c| {
                c.requirements.iter().map(|r| RequirementRow {
                    id: r.id.clone(),
                    rule_group: c.group.clone(),
                    description: r.description.clone(),
                    hardware_gap: r.hardware_gap,
                })
            })
            .collect();
        let mut vehicles = Vec::new();
        for p in profiles {
            let ratings = pack.checklists.iter().map(|c| rate(c, p)).collect::<Result<Vec<_>, _>>()?;
            let answers = pack
                .checklists
                .iter()
                .flat_map(|c| c.requirements.iter().map(|r| (r.id.clone(), p.answers[&r.id])))
                .collect();
            vehicles.push(VehicleResult {
                vehicle_id: p.vehicle_id.clone(),
                name: p.label().to_string(),
                sae_level: p.sae_level,
                answers,
                ratings,
            });
        }
        let mut rules = Vec::new();
        for e in &pack.entries {
            let eqs = &e.rule.equations;
            let mut outcomes = Vec::new();
            for s in scenarios.iter().filter(|s| s.scenario.rule_id == e.rule_id()) {
                let decisions = s.scenario.evaluate(eqs).map_err(|error| ReportError::Scenario {
                    name: s.name.clone(),
                    error,
                })?;
                outcomes.push(ScenarioOutcome {
                    name: s.name.clone(),
                    description: s.scenario.description.clone(),
                    decisions: decisions.into_iter().collect(),
                });
            }
            rules.push(RuleOutcome {
                rule_id: e.rule_id().to_string(),
                title: e.rule.file.source.title.clone(),
                citations: e.rule.file.source.citations.clone(),
                equations: eqs.to_text(Symbols::Ascii).lines().map(str::to_string).collect(),
                scenarios: outcomes,
            });
        }
        Ok(ComplianceReport {
            tool: ToolInfo {
                name: TOOL_NAME.to_string(),
                version: TOOL_VERSION.to_string(),
            },
            generated_at: None,
            inputs,
            requirements,
            vehicles,
            rules,
        })
    }

    pub fn to_json(&self) -> String {
        crate::rulepack::canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<ComplianceReport, RulepackError> {
        serde_json::from_str(text).map_err(|e| RulepackError::Json(e.to_string()))
    }

    /// The requirement × vehicle table, one rating row per group and the
    /// scenario outcomes. `ascii` swaps the cell glyphs for yes/no.
    pub fn to_text(&self, ascii: bool) -> String {
        let cell = |a: Answer| if ascii { a.ascii_symbol() } else { a.symbol() };
        let mut header = vec!["Road Rule/s".to_string(), "Requirement".to_string()];
        header.extend(self.vehicles.iter().map(|v| v.name.clone()));
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut last_group = "";
        for r in &self.requirements {
            let group = if r.rule_group == last_group { String::new() } else { r.rule_group.clone() };
            last_group = &r.rule_group;
            let mut row = vec![group, r.description.clone()];
            row.extend(self.vehicles.iter().map(|v| cell(v.answers[&r.id]).to_string()));
            rows.push(row);
        }
        let mut ratings: Vec<Vec<String>> = Vec::new();
        let groups: Vec<&str> = self.vehicles.first().map(|v| v.ratings.iter().map(|r| r.rule_group.as_str()).collect()).unwrap_or_default();
        for (i, g) in groups.iter().enumerate() {
            let mut row = vec![g.to_string(), String::new()];
            row.extend(self.vehicles.iter().map(|v| v.ratings[i].rating.as_str().to_string()));
            ratings.push(row);
        }

        let columns = header.len();
        let widths: Vec<usize> = (0..columns)
            .map(|c| {
                std::iter::once(&header)
                    .chain(&rows)
                    .chain(&ratings)
                    .map(|r| r[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (c, text) in cells.iter().enumerate() {
                s.push_str(text);
                if c + 1 < cells.len() {
                    s.extend(std::iter::repeat_n(' ', widths[c] - text.chars().count() + 2));
                }
            }
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        let rule: String = {
            let total = widths.iter().sum::<usize>() + 2 * (columns - 1);
            let mut s = "-".repeat(total);
            s.push('\n');
            s
        };

        let mut out = format!("{} {} compliance report\n", self.tool.name, self.tool.version);
        if let Some(t) = &self.generated_at {
            out.push_str(&format!("generated {t}\n"));
        }
        out.push('\n');
        out.push_str(&line(&header));
        out.push_str(&rule);
        rows.iter().for_each(|r| out.push_str(&line(r)));
        out.push_str(&rule);
        ratings.iter().for_each(|r| out.push_str(&line(r)));
        out.push('\n');
        out.push_str(&format!(
            "{} met, {} unmet, {} no relevant function fitted\n",
            cell(Answer::Met),
            cell(Answer::Unmet),
            cell(Answer::NotApplicable)
        ));

        for v in &self.vehicles {
            out.push('\n');
            out.push_str(&v.name);
            out.push('\n');
            for r in &v.ratings {
                out.push_str(&format!("  {:<8} {:<5}  {}\n", r.rule_group, r.rating.as_str(), r.rationale));
            }
        }

        let scenarios: Vec<(&RuleOutcome, &ScenarioOutcome)> =
            self.rules.iter().flat_map(|r| r.scenarios.iter().map(move |s| (r, s))).collect();
        if !scenarios.is_empty() {
            out.push_str("\nScenarios\n");
            for (r, s) in scenarios {
                let values: Vec<String> = s.decisions.iter().map(|(d, t)| format!("{d}={t}")).collect();
                out.push_str(&format!("  {} [{}] {}\n", r.rule_id, s.name, values.join(" ")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_checks_ids() {
        let eqs = RuleEquations::from_text("R", "E = t & !z\n", None).unwrap();
        let mut s = ScenarioFile {
            rule_id: "R".into(),
            description: String::new(),
            facts: [("t".to_string(), true), ("z".to_string(), false)].into(),
        };
        assert_eq!(s.evaluate(&eqs).unwrap(), [("E".to_string(), Truth::True)]);
        s.facts.insert("w".into(), true);
        assert_eq!(s.evaluate(&eqs).unwrap_err(), ScenarioError::UnknownVariable("w".into()));
        s.rule_id = "Q".into();
        assert!(matches!(s.assignment(&eqs), Err(ScenarioError::WrongRule { .. })));
    }

    #[test]
    fn empty_scenario_is_unknown() {
        let eqs = RuleEquations::from_text("R", "X = a & c\nY = a & !c\n", None).unwrap();
        let s = ScenarioFile::from_json(r#"{"rule_id": "R"}"#).unwrap();
        let values: Vec<Truth> = s.evaluate(&eqs).unwrap().into_iter().map(|(_, t)| t).collect();
        assert_eq!(values, [Truth::Unknown, Truth::Unknown]);
    }

    #[test]
    fn digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
