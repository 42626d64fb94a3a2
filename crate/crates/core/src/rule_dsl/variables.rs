use std::collections::BTreeMap;

use crate::boolean::{Variable, VariableKind, VariableTable};

use super::{child_path, Clause, Connective, DslError, RuleAst, Section};

/// The clause rendered as one sentence, children included.
pub(crate) fn clause_sentence(c: &Clause) -> String {
    if c.children.is_empty() {
        return c.text.clone();
    }
    let mut out = format!("{}: ", c.text);
    for (i, child) in c.children.iter().enumerate() {
        out.push_str(&clause_sentence(child));
        if i + 1 < c.children.len() {
            out.push_str(match child.connective {
                Connective::And => "; and ",
                Connective::Or => "; or ",
            });
        }
    }
    out
}

struct Slot<'a> {
    path: String,
    clause: &'a Clause,
    kind: VariableKind,
}

/// Gives every leaf condition, guard and outcome a variable id.
///
/// Ids come from `naming` (keyed by clause path, with or without the section
/// prefix), then `@var(..)`, then `<rule_id>.<path>`. A named clause with
/// children becomes a single variable.
pub fn assign_variables(ast: &RuleAst, naming: Option<&BTreeMap<String, String>>) -> Result<VariableTable, DslError> {
    let by_path = resolve_naming(ast, naming)?;
    let named = |path: &str, c: &Clause| by_path.get(path).cloned().or_else(|| c.var.clone());

    let mut slots = Vec::new();
    for s in Section::ALL {
        let kind = match s {
            Section::If => VariableKind::Factual,
            Section::Except => VariableKind::Situation,
            Section::Then | Section::Else => VariableKind::Decision,
        };
        for (i, c) in ast.section(s).iter().enumerate() {
            let path = child_path(s.keyword(), c, i);
            if s.is_outcome() {
                slots.push(Slot {
                    path: path.clone(),
                    clause: c,
                    kind,
                });
                for (j, q) in c.children.iter().enumerate().filter(|(_, q)| q.is_qualifier()) {
                    collect_conditions(q, &child_path(&path, q, j), VariableKind::Situation, &named, &mut slots);
                }
            } else {
                collect_conditions(c, &path, kind, &named, &mut slots);
            }
        }
    }

    let mut table = VariableTable::new();
    for slot in slots {
        let id = named(&slot.path, slot.clause).unwrap_or_else(|| format!("{}.{}", ast.rule_id, slot.path));
        let description = if slot.kind == VariableKind::Decision {
            slot.clause.text.clone()
        } else {
            clause_sentence(slot.clause)
        };
        if let Some(existing) = table.get(&id) {
            if existing.description != description || (existing.kind == VariableKind::Decision) != (slot.kind == VariableKind::Decision) {
                return Err(DslError::NamingConflict(id));
            }
        } else {
            table
                .insert(Variable {
                    id: id.clone(),
                    kind: slot.kind,
                    description,
                })
                .map_err(|_| DslError::NamingConflict(id.clone()))?;
        }
        table.bind(slot.path, id);
    }
    Ok(table)
}

fn collect_conditions<'a>(
    c: &'a Clause,
    path: &str,
    kind: VariableKind,
    named: &dyn Fn(&str, &Clause) -> Option<String>,
    out: &mut Vec<Slot<'a>>,
) {
    if c.is_leaf() || named(path, c).is_some() {
        out.push(Slot {
            path: path.to_string(),
            clause: c,
            kind,
        });
        return;
    }
    for (i, child) in c.children.iter().enumerate() {
        collect_conditions(child, &child_path(path, child, i), kind, named, out);
    }
}

fn resolve_naming(ast: &RuleAst, naming: Option<&BTreeMap<String, String>>) -> Result<BTreeMap<String, String>, DslError> {
    let mut out = BTreeMap::new();
    let Some(naming) = naming else { return Ok(out) };
    let mut paths = Vec::new();
    ast.walk(|p, _, _, _| paths.push(p.to_string()));
    for (key, id) in naming {
        let hits: Vec<&String> = paths
            .iter()
            .filter(|p| *p == key || p.split_once('.').is_some_and(|(_, rest)| rest == key))
            .collect();
        match hits.as_slice() {
            [one] => {
                out.insert((*one).clone(), id.clone());
            }
            _ => return Err(DslError::UnknownPath(key.clone())),
        }
    }
    Ok(out)
}
