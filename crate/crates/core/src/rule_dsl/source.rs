use std::collections::BTreeMap;

use super::{parse_rule, DslError, RuleAst, RuleSource};

/// A parsed `.rule` file: header fields plus the DSL body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleFile {
    pub source: RuleSource,
    pub group: Option<String>,
    /// `name: <path> = <id>` headers.
    pub naming: BTreeMap<String, String>,
    /// 1-based line of the body's first line within the file.
    pub body_line: usize,
}

impl RuleFile {
    /// Parses the body, reporting positions relative to the whole file.
    pub fn parse(&self) -> Result<RuleAst, DslError> {
        parse_rule(&self.source).map_err(|e| e.offset_lines(self.body_line - 1))
    }

    pub fn naming(&self) -> Option<&BTreeMap<String, String>> {
        (!self.naming.is_empty()).then_some(&self.naming)
    }
}

fn syntax(line: usize, col: usize, expected: &str) -> DslError {
    DslError::Syntax {
        line,
        col,
        expected: expected.to_string(),
    }
}

/// Splits a `.rule` file into headers (`rule:`, `title:`, `cites:`, `group:`,
/// `name:`) and body. Headers end at the first blank line.
pub fn parse_rule_file(text: &str) -> Result<RuleFile, DslError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rule_id = None;
    let mut title = String::new();
    let mut citations = Vec::new();
    let mut group = None;
    let mut naming = BTreeMap::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut body_start = lines.len();
    let mut seen_header = false;
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            if seen_header {
                body_start = i + 1;
                break;
            }
            continue;
        }
        let Some((key, value)) = trimmed.split_once(':') else {
            return Err(syntax(i + 1, 1, "header line `key: value`"));
        };
        let value = value.trim().to_string();
        match key.trim() {
            "rule" => rule_id = Some(value),
            "title" => title = value,
            "cites" => citations.push(value),
            "group" => group = Some(value),
            "name" => {
                let Some((path, id)) = value.split_once('=') else {
                    return Err(syntax(i + 1, 1, "naming header `name: <path> = <id>`"));
                };
                naming.insert(path.trim().to_string(), id.trim().to_string());
            }
            _ if !seen_header => {
                return Err(syntax(i + 1, 1, "header `rule: <id>` before the rule body"));
            }
            _ => return Err(syntax(i + 1, 1, "header key rule, title, cites, group or name")),
        }
        seen_header = true;
    }
    let rule_id = match rule_id {
        Some(id) if !id.is_empty() => id,
        _ => return Err(syntax(1, 1, "header `rule: <id>`")),
    };
    let body = lines.get(body_start..).unwrap_or(&[]).join("\n");
    Ok(RuleFile {
        source: RuleSource {
            rule_id,
            title,
            text: body,
            citations,
        },
        group,
        naming,
        body_line: body_start + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_and_body() {
        let f = parse_rule_file(
            "# comment\nrule: R/1\ntitle: Example\ncites: Act A\ncites: Act B\ngroup: 1-2\nname: IF.A = a\n\nIF:\n    [A] p.\nELSE:\n    [Y] q.\n",
        )
        .unwrap();
        assert_eq!(f.source.rule_id, "R/1");
        assert_eq!(f.source.citations, vec!["Act A", "Act B"]);
        assert_eq!(f.group.as_deref(), Some("1-2"));
        assert_eq!(f.naming["IF.A"], "a");
        assert_eq!(f.body_line, 9);
        assert!(f.source.text.starts_with("IF:"));
    }

    #[test]
    fn body_errors_use_file_lines() {
        let f = parse_rule_file("rule: R\n\nIF:\n    [A] p.\nTHEN:\n    [X] q.\n").unwrap();
        let err = f.parse().unwrap_err();
        assert_eq!(err.position().unwrap().0, 6);
    }

    #[test]
    fn missing_rule_id() {
        assert!(parse_rule_file("IF: [A] p. ELSE: [Y] q.\n").is_err());
    }
}
