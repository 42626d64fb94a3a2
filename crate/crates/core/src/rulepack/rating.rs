use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RulepackError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityRequirement {
    pub id: String,
    pub description: String,
    /// Meeting this requirement needs hardware the vehicle class lacks.
    #[serde(default)]
    pub hardware_gap: bool,
}

/// `<group>.checklist.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checklist {
    pub group: String,
    #[serde(default)]
    pub title: String,
    pub requirements: Vec<CapabilityRequirement>,
}

impl Checklist {
    pub fn from_json(text: &str) -> Result<Checklist, RulepackError> {
        let c: Checklist = serde_json::from_str(text).map_err(|e| RulepackError::Json(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::new();
        for r in &c.requirements {
            if !seen.insert(r.id.as_str()) {
                return Err(RulepackError::DuplicateRequirement(r.id.clone()));
            }
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Answer {
    Met,
    Unmet,
    NotApplicable,
}

impl Answer {
    /// Cell glyph used in text reports.
    pub fn symbol(self) -> &'static str {
        match self {
            Answer::Met => "✓",
            Answer::Unmet => "✗",
            Answer::NotApplicable => "N/A",
        }
    }

    pub fn ascii_symbol(self) -> &'static str {
        match self {
            Answer::Met => "yes",
            Answer::Unmet => "no",
            Answer::NotApplicable => "N/A",
        }
    }
}

/// `vehicles/<id>.profile.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityProfile {
    pub vehicle_id: String,
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sae_level: Option<u8>,
    /// Report column position; profiles without one sort last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<u32>,
    pub answers: BTreeMap<String, Answer>,
}

impl CapabilityProfile {
    pub fn from_json(text: &str) -> Result<CapabilityProfile, RulepackError> {
        serde_json::from_str(text).map_err(|e| RulepackError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    /// Display name, falling back to the id.
    pub fn label(&self) -> &str {
        if self.name.is_empty() {
            &self.vehicle_id
        } else {
            &self.name
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rag {
    Green,
    Amber,
    Red,
}

impl Rag {
    pub fn as_str(self) -> &'static str {
        match self {
            Rag::Green => "GREEN",
            Rag::Amber => "AMBER",
            Rag::Red => "RED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RagRating {
    pub rule_group: String,
    pub rating: Rag,
    pub rationale: String,
}

/// GREEN when every applicable requirement is met, RED when an unmet one is
/// hardware-flagged, AMBER otherwise. A group with nothing applicable is AMBER.
pub fn rate(checklist: &Checklist, profile: &CapabilityProfile) -> Result<RagRating, RulepackError> {
    let missing: Vec<String> = checklist
        .requirements
        .iter()
        .filter(|r| !profile.answers.contains_key(&r.id))
        .map(|r| r.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(RulepackError::IncompleteProfile {
            vehicle_id: profile.vehicle_id.clone(),
            missing,
        });
    }
    let answer = |r: &CapabilityRequirement| profile.answers[&r.id];
    let applicable = checklist.requirements.iter().filter(|r| answer(r) != Answer::NotApplicable).count();
    let unmet: Vec<&CapabilityRequirement> =
        checklist.requirements.iter().filter(|r| answer(r) == Answer::Unmet).collect();
    let hardware: Vec<&str> = unmet.iter().filter(|r| r.hardware_gap).map(|r| r.id.as_str()).collect();
    let (rating, rationale) = if applicable == 0 {
        (Rag::Amber, "no applicable evidence".to_string())
    } else if !hardware.is_empty() {
        (Rag::Red, format!("hardware gap: {}", hardware.join(", ")))
    } else if !unmet.is_empty() {
        let ids: Vec<&str> = unmet.iter().map(|r| r.id.as_str()).collect();
        (Rag::Amber, format!("software gap: {}", ids.join(", ")))
    } else {
        (Rag::Green, format!("all {applicable} applicable requirements met"))
    };
    Ok(RagRating {
        rule_group: checklist.group.clone(),
        rating,
        rationale,
    })
}

pub(crate) fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
    s.push('\n');
    s
}
