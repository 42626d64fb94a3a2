use std::collections::BTreeSet;

use super::lexer::{scan, Marker, RawItem, RawSection};
use super::{Clause, Connective, DslError, RuleAst, RuleSource, Section};

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> DslError {
    DslError::Syntax {
        line,
        col,
        expected: expected.into(),
    }
}

/// Parses the DSL body of `source` into a clause tree.
pub fn parse_rule(source: &RuleSource) -> Result<RuleAst, DslError> {
    let sections = scan(&source.text)?;
    let mut ast = RuleAst {
        rule_id: source.rule_id.clone(),
        if_clauses: Vec::new(),
        except_clauses: Vec::new(),
        then_outcomes: Vec::new(),
        else_outcomes: Vec::new(),
    };
    let Some(first) = sections.first() else {
        return Err(syntax(1, 1, "section header `IF:`"));
    };
    if first.section != Section::If {
        return Err(syntax(first.line, first.col, "section header `IF:`"));
    }
    let mut last: Option<Section> = None;
    let mut seen_brackets = BTreeSet::new();
    for raw in &sections {
        if last.is_some_and(|l| raw.section <= l) {
            return Err(syntax(
                raw.line,
                raw.col,
                "sections in the order IF, EXCEPT, THEN, ELSE with none repeated",
            ));
        }
        last = Some(raw.section);
        if raw.items.is_empty() {
            if matches!(raw.section, Section::If | Section::Else) {
                return Err(syntax(raw.line, raw.col, format!("at least one clause under `{}:`", raw.section)));
            }
            continue;
        }
        check_outcome_labels(raw)?;
        let tree = build_tree(raw, &mut seen_brackets)?;
        *ast.section_mut(raw.section) = tree;
    }
    if last != Some(Section::Else) {
        let end = source.text.lines().count().max(1);
        return Err(syntax(end, 1, "`ELSE:` section with a default outcome"));
    }
    Ok(ast)
}

fn check_outcome_labels(raw: &RawSection) -> Result<(), DslError> {
    let family = match raw.section {
        Section::Then => 'X',
        Section::Else => 'Y',
        _ => return Ok(()),
    };
    for item in raw.items.iter().filter(|i| i.depth == 0) {
        let ok = match &item.marker {
            Some(Marker::Bracket(l)) => l.starts_with(family) || item.var.is_some(),
            _ => item.var.is_some(),
        };
        if !ok {
            return Err(syntax(
                item.line,
                item.col,
                format!("outcome label `[{family}]` or an @var(...) annotation"),
            ));
        }
    }
    Ok(())
}

fn build_tree(raw: &RawSection, seen_brackets: &mut BTreeSet<String>) -> Result<Vec<Clause>, DslError> {
    let mut pos = 0;
    let list = build_level(&raw.items, &mut pos, 0, seen_brackets)?;
    if let Some(item) = raw.items.get(pos) {
        return Err(syntax(item.line, item.col, "indentation matching an enclosing clause (unbalanced nesting)"));
    }
    Ok(list)
}

fn build_level(
    items: &[RawItem],
    pos: &mut usize,
    depth: usize,
    seen_brackets: &mut BTreeSet<String>,
) -> Result<Vec<Clause>, DslError> {
    let mut clauses = Vec::new();
    let mut explicit: Vec<Option<Connective>> = Vec::new();
    let mut labels = BTreeSet::new();
    while let Some(item) = items.get(*pos) {
        if item.depth < depth {
            break;
        }
        if item.depth > depth {
            return Err(syntax(item.line, item.col, "a parent clause before this sub-item (unbalanced nesting)"));
        }
        match &item.marker {
            Some(Marker::Bracket(l)) => {
                if depth > 0 {
                    return Err(syntax(item.line, item.col, "list marker such as `a.` on a sub-item"));
                }
                if !seen_brackets.insert(l.clone()) {
                    return Err(DslError::DuplicateLabel {
                        label: l.clone(),
                        line: item.line,
                        col: item.col,
                    });
                }
            }
            Some(Marker::List(_)) if depth == 0 => {
                return Err(syntax(item.line, item.col, "bracket label such as `[A]` on a top-level clause"));
            }
            _ => {}
        }
        if let Some(m) = &item.marker {
            if !labels.insert(m.label().to_string()) {
                return Err(DslError::DuplicateLabel {
                    label: m.label().to_string(),
                    line: item.line,
                    col: item.col,
                });
            }
        }
        *pos += 1;
        let children = build_level(items, pos, depth + 1, seen_brackets)?;
        explicit.push(item.connective);
        clauses.push(Clause {
            label: item.marker.as_ref().map(|m| m.label().to_string()),
            text: item.text.clone(),
            var: item.var.clone(),
            connective: Connective::And,
            children,
        });
    }
    let resolved = resolve_connectives(&explicit);
    for (c, conn) in clauses.iter_mut().zip(resolved) {
        c.connective = conn;
    }
    Ok(clauses)
}

/// A bare terminator takes the nearest spelled-out connective before it, or
/// failing that the nearest one after it; the last sibling is always `And`.
fn resolve_connectives(explicit: &[Option<Connective>]) -> Vec<Connective> {
    let n = explicit.len();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                return Connective::And;
            }
            explicit[i]
                .or_else(|| explicit[..i].iter().rev().flatten().next().copied())
                .or_else(|| explicit[i + 1..n - 1].iter().flatten().next().copied())
                .unwrap_or_default()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RuleAst {
        parse_rule(&RuleSource::new("t", text)).unwrap()
    }

    const SEAT_BELT: &str = "IF: [A] Vehicle occupant is: a. An adult; or, b. A minor over: i. 14 years of age; or, \
        ii. 1.35 metres in height. EXCEPT: [C] Where seat belt is not fitted or available; \
        THEN: [X] Seat belt cannot be worn. ELSE: [Y] Seat belt MUST be worn.";

    #[test]
    fn inline_seat_belt_rule() {
        let ast = parse(SEAT_BELT);
        assert_eq!(ast.if_clauses.len(), 1);
        let a = &ast.if_clauses[0];
        assert_eq!(a.label.as_deref(), Some("A"));
        assert_eq!(a.text, "Vehicle occupant is");
        assert_eq!(a.children.len(), 2);
        assert_eq!(a.children[0].connective, Connective::Or);
        let b = &a.children[1];
        assert_eq!(b.text, "A minor over");
        assert_eq!(b.children.len(), 2);
        assert_eq!(b.children[0].label.as_deref(), Some("i"));
        assert_eq!(b.children[0].connective, Connective::Or);
        assert_eq!(b.children[1].text, "1.35 metres in height");
        assert_eq!(ast.except_clauses[0].text, "Where seat belt is not fitted or available");
        assert_eq!(ast.then_outcomes[0].label.as_deref(), Some("X"));
        assert_eq!(ast.else_outcomes[0].text, "Seat belt MUST be worn");
    }

    #[test]
    fn block_layout_matches_inline() {
        let block = "IF:\n    [A] Vehicle occupant is:\n        a. An adult; or,\n        b. A minor over:\n            \
            i. 14 years of age; or,\n            ii. 1.35 metres in height.\nEXCEPT:\n    \
            [C] Where seat belt is not fitted or available;\nTHEN:\n    [X] Seat belt cannot be worn.\nELSE:\n    \
            [Y] Seat belt MUST be worn.\n";
        assert_eq!(parse(block), parse(SEAT_BELT));
    }

    #[test]
    fn minimal_rule() {
        let ast = parse("IF: [A] p. ELSE: [Y] q.");
        assert!(ast.except_clauses.is_empty());
        assert!(ast.then_outcomes.is_empty());
        assert_eq!(ast.if_clauses[0].text, "p");
    }

    #[test]
    fn bare_terminators_take_following_connective() {
        let ast = parse(
            "IF: [A] Where a vehicle is approaching a pedestrian crossing; EXCEPT: [C] Where there is no person on \
             or entering the pedestrian crossing, and: a. a flashing amber light; b. a green light; or, c. no \
             traffic lights. THEN: [X] proceed. ELSE: [Y] stop.",
        );
        let c = &ast.except_clauses[0];
        assert_eq!(c.children.len(), 3);
        assert_eq!(c.children[0].connective, Connective::Or);
        assert_eq!(c.children[1].connective, Connective::Or);
        assert_eq!(c.children[2].connective, Connective::And);
    }

    #[test]
    fn restarted_list_nests() {
        let ast = parse(
            "IF: [A] x. EXCEPT: [C] Where child restraint is: a. unavailable; i. In a taxi; or, ii. For reasons \
             of necessity; a. over a short distance; or, iii. If two restraints prevent a third. \
             ELSE: [Y] y.",
        );
        let a = &ast.except_clauses[0].children[0];
        assert_eq!(a.children.len(), 3);
        assert_eq!(a.children[1].children[0].text, "over a short distance");
        assert_eq!(a.children[2].label.as_deref(), Some("iii"));
    }

    #[test]
    fn missing_else_is_reported() {
        let err = parse_rule(&RuleSource::new("t", "IF: [A] p. THEN: [X] q.")).unwrap_err();
        assert!(matches!(err, DslError::Syntax { ref expected, .. } if expected.contains("ELSE")));
    }

    #[test]
    fn duplicate_label_is_reported() {
        let err = parse_rule(&RuleSource::new("t", "IF:\n    [A] p; and,\n    [A] q.\nELSE:\n    [Y] r.\n")).unwrap_err();
        assert_eq!(
            err,
            DslError::DuplicateLabel {
                label: "A".into(),
                line: 3,
                col: 5
            }
        );
    }

    #[test]
    fn unbalanced_indent_is_reported() {
        let err = parse_rule(&RuleSource::new("t", "IF:\n    [A] p:\n        a. q;\n      b. r.\nELSE:\n    [Y] s.\n"))
            .unwrap_err();
        assert_eq!(err.position(), Some((4, 7)));
    }

    #[test]
    fn outcome_needs_family_label() {
        let err = parse_rule(&RuleSource::new("t", "IF: [A] p. ELSE: [X] q.")).unwrap_err();
        assert!(matches!(err, DslError::Syntax { ref expected, .. } if expected.contains("[Y]")));
    }

    #[test]
    fn annotation_is_captured() {
        let ast = parse("IF:\n    [A] baby under 3 @var(t)\nELSE:\n    [Y] q. @var(E)\n");
        assert_eq!(ast.if_clauses[0].var.as_deref(), Some("t"));
        assert_eq!(ast.if_clauses[0].text, "baby under 3");
        assert_eq!(ast.else_outcomes[0].var.as_deref(), Some("E"));
    }

    #[test]
    fn typographic_punctuation_is_folded() {
        let ast = parse("IF: [A] vehicle\u{2019}s lane \u{2013} left. ELSE: [Y] q.");
        assert_eq!(ast.if_clauses[0].text, "vehicle's lane - left");
    }
}
