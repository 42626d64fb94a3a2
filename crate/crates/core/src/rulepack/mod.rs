//! Rules shipped as data: `.rule` sources with golden equations, capability
//! checklists per rule group, and vehicle capability profiles.
//!
//! Layout of a pack directory:
//!
//! ```text
//! <stem>.rule               structured rule with `rule:` / `cites:` / `group:` headers
//! <stem>.golden.beq         expected equations, one `D = expr` per line
//! <group>.checklist.json    {"group", "title", "requirements": [{"id", "description", "hardware_gap"}]}
//! vehicles/<id>.profile.json {"vehicle_id", "name", "sae_level", "answers": {id: MET|UNMET|NOT_APPLICABLE}}
//! scenarios/<name>.json     {"rule_id", "description", "facts": {id: bool}}
//! ```

mod rating;

pub(crate) use rating::canonical_json;
pub use rating::{rate, Answer, CapabilityProfile, CapabilityRequirement, Checklist, Rag, RagRating};

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::boolean::{compile, equations_equivalent, Assignment, BoolError, RuleEquations};
use crate::report::{sha256_hex, NamedScenario, ScenarioError, ScenarioFile};
use crate::rule_dsl::{assign_variables, parse_rule_file, DslError, RuleAst, RuleFile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RulepackError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{error}")]
    Parse { path: String, error: DslError },
    #[error("{path}: {error}")]
    Naming { path: String, error: DslError },
    #[error("{path}: {error}")]
    Compile { path: String, error: BoolError },
    #[error("{path}: golden equations: {error}")]
    GoldenSyntax { path: String, error: BoolError },
    #[error("rule `{0}` has no golden equation file")]
    MissingGolden(String),
    #[error("rule `{rule_id}`: compiled `{decision}` differs from golden{}", witness.as_ref().map(|w| format!(" at {w}")).unwrap_or_else(|| " (decision missing on one side)".into()))]
    GoldenMismatch {
        rule_id: String,
        decision: String,
        witness: Option<Assignment>,
    },
    #[error("rule id `{0}` appears in more than one file")]
    DuplicateRule(String),
    #[error("requirement id `{0}` appears more than once")]
    DuplicateRequirement(String),
    #[error("checklist file for group `{file}` declares group `{declared}`")]
    GroupMismatch { file: String, declared: String },
    #[error("no checklist for rule group `{0}`")]
    UnknownGroup(String),
    #[error("profile `{vehicle_id}` has no answer for: {}", missing.join(", "))]
    IncompleteProfile { vehicle_id: String, missing: Vec<String> },
    #[error("scenario `{name}`: {error}")]
    Scenario { name: String, error: ScenarioError },
    #[error("{0}")]
    Json(String),
}

/// A rule file parsed and compiled to equations.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledRule {
    pub file: RuleFile,
    pub ast: RuleAst,
    pub equations: RuleEquations,
}

impl CompiledRule {
    pub fn rule_id(&self) -> &str {
        &self.file.source.rule_id
    }
}

fn io_error(path: &Path, e: std::io::Error) -> RulepackError {
    RulepackError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Parses, names and compiles rule text. `path` is only used in errors.
pub fn compile_rule_text(path: &str, text: &str) -> Result<CompiledRule, RulepackError> {
    let parse_err = |error| RulepackError::Parse {
        path: path.to_string(),
        error,
    };
    let file = parse_rule_file(text).map_err(parse_err)?;
    let ast = file.parse().map_err(parse_err)?;
    let table = assign_variables(&ast, file.naming()).map_err(|error| RulepackError::Naming {
        path: path.to_string(),
        error,
    })?;
    let equations = compile(&ast, &table).map_err(|error| RulepackError::Compile {
        path: path.to_string(),
        error,
    })?;
    Ok(CompiledRule { file, ast, equations })
}

pub fn compile_rule_file(path: &Path) -> Result<CompiledRule, RulepackError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    compile_rule_text(&path.display().to_string(), &text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RulepackEntry {
    /// File name without `.rule`.
    pub stem: String,
    pub path: PathBuf,
    pub rule: CompiledRule,
    pub golden: RuleEquations,
    pub golden_text: String,
}

impl RulepackEntry {
    pub fn rule_id(&self) -> &str {
        self.rule.rule_id()
    }

    pub fn group(&self) -> Option<&str> {
        self.rule.file.group.as_deref()
    }

    /// Entries `<base>/<n>` with numeric `n` are parts of bundle `<base>`;
    /// other `/` suffixes mark variants of `<base>` that stand outside bundles.
    pub fn bundle_id(&self) -> Option<&str> {
        match self.rule_id().rsplit_once('/') {
            None => Some(self.rule_id()),
            Some((base, n)) if n.chars().all(|c| c.is_ascii_digit()) => Some(base),
            Some(_) => None,
        }
    }
}

/// Rules sharing a bundle id, with their equations unioned.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleBundle {
    pub id: String,
    pub group: Option<String>,
    pub members: Vec<String>,
    pub equations: RuleEquations,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rulepack {
    pub root: PathBuf,
    pub entries: Vec<RulepackEntry>,
    pub checklists: Vec<Checklist>,
    pub profiles: Vec<CapabilityProfile>,
    pub scenarios: Vec<NamedScenario>,
    /// Path relative to the root (with `/`) → SHA-256 of every file loaded.
    pub digests: BTreeMap<String, String>,
}

fn sorted_files(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>, RulepackError> {
    let mut out = Vec::new();
    for item in fs::read_dir(dir).map_err(|e| io_error(dir, e))? {
        let path = item.map_err(|e| io_error(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if path.is_file() && name.ends_with(suffix) && name.len() > suffix.len() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn stem<'a>(path: &'a Path, suffix: &str) -> &'a str {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    &name[..name.len() - suffix.len()]
}

fn read(path: &Path) -> Result<String, RulepackError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn record(pack: &mut Rulepack, path: &Path) -> Result<(), RulepackError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    let rel = path.strip_prefix(&pack.root).unwrap_or(path);
    let name: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    pack.digests.insert(name.join("/"), sha256_hex(&bytes));
    Ok(())
}

fn load_entry(path: &Path) -> Result<RulepackEntry, RulepackError> {
    let rule = compile_rule_file(path)?;
    let stem = stem(path, ".rule").to_string();
    let golden_path = path.with_file_name(format!("{stem}.golden.beq"));
    if !golden_path.is_file() {
        return Err(RulepackError::MissingGolden(rule.rule_id().to_string()));
    }
    let golden_text = read(&golden_path)?;
    let golden = RuleEquations::from_text(rule.rule_id(), &golden_text, Some(&rule.equations.table)).map_err(|error| {
        RulepackError::GoldenSyntax {
            path: golden_path.display().to_string(),
            error,
        }
    })?;
    let mismatch = equations_equivalent(&rule.equations, &golden).map_err(|error| RulepackError::Compile {
        path: path.display().to_string(),
        error,
    })?;
    if let Some(m) = mismatch {
        return Err(RulepackError::GoldenMismatch {
            rule_id: rule.rule_id().to_string(),
            decision: m.decision,
            witness: m.witness,
        });
    }
    Ok(RulepackEntry {
        stem,
        path: path.to_path_buf(),
        rule,
        golden,
        golden_text,
    })
}

/// Loads and cross-checks a pack: every rule must compile to equations
/// truth-table-equivalent to its golden file.
pub fn load_rulepack(dir: &Path) -> Result<Rulepack, RulepackError> {
    let mut pack = Rulepack {
        root: dir.to_path_buf(),
        ..Rulepack::default()
    };
    let mut ids = BTreeSet::new();
    for path in sorted_files(dir, ".rule")? {
        let entry = load_entry(&path)?;
        if !ids.insert(entry.rule_id().to_string()) {
            return Err(RulepackError::DuplicateRule(entry.rule_id().to_string()));
        }
        record(&mut pack, &path)?;
        record(&mut pack, &path.with_file_name(format!("{}.golden.beq", entry.stem)))?;
        pack.entries.push(entry);
    }
    let mut requirement_ids = BTreeSet::new();
    for path in sorted_files(dir, ".checklist.json")? {
        let checklist = Checklist::from_json(&read(&path)?).map_err(|e| match e {
            RulepackError::Json(m) => RulepackError::Json(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let file = stem(&path, ".checklist.json");
        if checklist.group != file {
            return Err(RulepackError::GroupMismatch {
                file: file.to_string(),
                declared: checklist.group,
            });
        }
        for r in &checklist.requirements {
            if !requirement_ids.insert(r.id.clone()) {
                return Err(RulepackError::DuplicateRequirement(r.id.clone()));
            }
        }
        pack.checklists.push(checklist);
        record(&mut pack, &path)?;
    }
    pack.checklists.sort_by_key(|c| group_order(&c.group));
    let vehicles = dir.join("vehicles");
    if vehicles.is_dir() {
        for path in sorted_files(&vehicles, ".profile.json")? {
            pack.profiles.push(load_profile(&path)?);
            record(&mut pack, &path)?;
        }
        pack.profiles.sort_by_key(|p| (p.column.unwrap_or(u32::MAX), p.vehicle_id.clone()));
    }
    let scenarios = dir.join("scenarios");
    if scenarios.is_dir() {
        for path in sorted_files(&scenarios, ".json")? {
            let name = stem(&path, ".json").to_string();
            let scenario = ScenarioFile::from_json(&read(&path)?).map_err(|error| RulepackError::Scenario {
                name: name.clone(),
                error,
            })?;
            let entry = pack.entry(&scenario.rule_id).ok_or_else(|| RulepackError::Scenario {
                name: name.clone(),
                error: ScenarioError::WrongRule {
                    scenario: scenario.rule_id.clone(),
                    rule: "(none in pack)".into(),
                },
            })?;
            scenario
                .assignment(&entry.rule.equations)
                .map_err(|error| RulepackError::Scenario { name: name.clone(), error })?;
            record(&mut pack, &path)?;
            pack.scenarios.push(NamedScenario { name, scenario });
        }
    }
    Ok(pack)
}

pub fn load_profile(path: &Path) -> Result<CapabilityProfile, RulepackError> {
    CapabilityProfile::from_json(&read(path)?).map_err(|e| match e {
        RulepackError::Json(m) => RulepackError::Json(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Numeric order on the leading rule number ("99-100" before "103-105").
fn group_order(group: &str) -> (u32, String) {
    let lead: String = group.chars().take_while(char::is_ascii_digit).collect();
    (lead.parse().unwrap_or(u32::MAX), group.to_string())
}

impl Rulepack {
    pub fn entry(&self, rule_id: &str) -> Option<&RulepackEntry> {
        self.entries.iter().find(|e| e.rule_id() == rule_id || e.stem == rule_id)
    }

    pub fn checklist(&self, group: &str) -> Option<&Checklist> {
        self.checklists.iter().find(|c| c.group == group)
    }

    pub fn profile(&self, vehicle_id: &str) -> Option<&CapabilityProfile> {
        self.profiles.iter().find(|p| p.vehicle_id == vehicle_id)
    }

    pub fn rate(&self, group: &str, profile: &CapabilityProfile) -> Result<RagRating, RulepackError> {
        let checklist = self
            .checklist(group)
            .ok_or_else(|| RulepackError::UnknownGroup(group.to_string()))?;
        rate(checklist, profile)
    }

    pub fn rate_all(&self, profile: &CapabilityProfile) -> Result<Vec<RagRating>, RulepackError> {
        self.checklists.iter().map(|c| rate(c, profile)).collect()
    }

    /// Equation bundles in first-member order; variants are skipped.
    pub fn bundles(&self) -> Result<Vec<RuleBundle>, RulepackError> {
        let mut order: Vec<&str> = Vec::new();
        for e in &self.entries {
            if let Some(b) = e.bundle_id() {
                if !order.contains(&b) {
                    order.push(b);
                }
            }
        }
        order.sort_by_key(|id| {
            let e = self.entries.iter().find(|e| e.bundle_id() == Some(id)).unwrap();
            group_order(e.group().unwrap_or(id))
        });
        order
            .into_iter()
            .map(|id| {
                let members: Vec<&RulepackEntry> = self.entries.iter().filter(|e| e.bundle_id() == Some(id)).collect();
                let parts: Vec<RuleEquations> = members.iter().map(|e| e.rule.equations.clone()).collect();
                let equations = RuleEquations::merge(id, &parts).map_err(|error| RulepackError::Compile {
                    path: id.to_string(),
                    error,
                })?;
                Ok(RuleBundle {
                    id: id.to_string(),
                    group: members[0].group().map(str::to_string),
                    members: members.iter().map(|e| e.rule_id().to_string()).collect(),
                    equations,
                })
            })
            .collect()
    }
}
