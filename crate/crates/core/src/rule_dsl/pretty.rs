use super::{Clause, Connective, RuleAst, Section};

const INDENT: &str = "    ";

/// Canonical block-layout text for `ast`; empty EXCEPT/THEN sections are left out.
pub fn pretty_print(ast: &RuleAst) -> String {
    let mut out = String::new();
    for s in Section::ALL {
        let list = ast.section(s);
        if list.is_empty() && matches!(s, Section::Except | Section::Then) {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(s.keyword());
        out.push_str(":\n");
        write_list(list, 1, &mut out);
    }
    out
}

fn write_list(list: &[Clause], depth: usize, out: &mut String) {
    for (i, c) in list.iter().enumerate() {
        let last = i + 1 == list.len();
        for _ in 0..depth {
            out.push_str(INDENT);
        }
        if let Some(l) = &c.label {
            if depth == 1 && l.starts_with(|ch: char| ch.is_ascii_uppercase()) {
                out.push_str(&format!("[{l}] "));
            } else {
                out.push_str(&format!("{l}. "));
            }
        }
        out.push_str(&c.text);
        let tail = if last {
            ""
        } else {
            match c.connective {
                Connective::Or => "; or",
                Connective::And => "; and",
            }
        };
        out.push_str(tail);
        out.push_str(match (c.is_leaf(), last) {
            (true, true) => ".",
            (true, false) => ",",
            (false, _) => ":",
        });
        if let Some(v) = &c.var {
            out.push_str(&format!(" @var({v})"));
        }
        out.push('\n');
        write_list(&c.children, depth + 1, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule_dsl::{parse_rule, RuleSource};

    #[test]
    fn no_exception_omits_sections() {
        let ast = parse_rule(&RuleSource::new("t", "IF: [A] p. ELSE: [Y] q.")).unwrap();
        assert_eq!(pretty_print(&ast), "IF:\n    [A] p.\n\nELSE:\n    [Y] q.\n");
    }

    #[test]
    fn nested_round_trip() {
        let text = "IF: [A] Vehicle occupant is: a. An adult; or, b. A minor over: i. 14 years of age; or, \
            ii. 1.35 metres in height. EXCEPT: [C] Where seat belt is not fitted or available; \
            THEN: [X] Seat belt cannot be worn. ELSE: [Y] Seat belt MUST be worn. @var(D)";
        let ast = parse_rule(&RuleSource::new("t", text)).unwrap();
        let printed = pretty_print(&ast);
        assert!(printed.contains("        a. An adult; or,\n"));
        assert!(printed.contains("        b. A minor over:\n"));
        assert!(printed.contains("[Y] Seat belt MUST be worn. @var(D)\n"));
        assert_eq!(parse_rule(&RuleSource::new("t", &printed)).unwrap(), ast);
    }
}
