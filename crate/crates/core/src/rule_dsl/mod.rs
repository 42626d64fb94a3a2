//! Structured-English rule notation.
//!
//! A rule has four sections in fixed order:
//!
//! ```text
//! IF:
//!     [A] Vehicle occupant is:
//!         a. An adult; or,
//!         b. A minor over:
//!             i. 14 years of age; or,
//!             ii. 1.35 metres in height.
//! EXCEPT:
//!     [C] Where seat belt is not fitted or available;
//! THEN:
//!     [X] Seat belt cannot be worn.
//! ELSE:
//!     [Y] Seat belt MUST be worn.
//! ```
//!
//! `EXCEPT:` and `THEN:` are optional. Nesting follows indentation when every
//! section header sits on its own line; otherwise the whole body is read as
//! running text and nesting is inferred from list markers. A line may end with
//! `@var(id)` to name the clause's variable; a named clause with children is
//! treated as one atomic condition.

mod lexer;
mod parser;
mod pretty;
mod source;
mod variables;

pub use parser::parse_rule;
pub use pretty::pretty_print;
pub use source::{parse_rule_file, RuleFile};
pub use variables::assign_variables;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSource {
    pub rule_id: String,
    pub title: String,
    pub text: String,
    pub citations: Vec<String>,
}

impl RuleSource {
    pub fn new(rule_id: impl Into<String>, text: impl Into<String>) -> Self {
        RuleSource {
            rule_id: rule_id.into(),
            title: String::new(),
            text: text.into(),
            citations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Connective {
    #[default]
    And,
    Or,
}

/// One labeled condition or outcome, possibly refined by sub-items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub label: Option<String>,
    pub text: String,
    pub var: Option<String>,
    /// Relation to the next sibling; always `And` on the last sibling.
    pub connective: Connective,
    pub children: Vec<Clause>,
}

impl Clause {
    pub fn leaf(label: Option<&str>, text: &str) -> Self {
        Clause {
            label: label.map(str::to_string),
            text: text.to_string(),
            var: None,
            connective: Connective::And,
            children: Vec::new(),
        }
    }

    /// Outcome sub-items introduced by "Where" qualify the outcome; they are
    /// compiled as extra conjuncts. Other outcome sub-items are descriptive.
    pub fn is_qualifier(&self) -> bool {
        let t = self.text.trim_start();
        match t.get(..5) {
            Some(head) if head.eq_ignore_ascii_case("where") => !t[5..].starts_with(char::is_alphanumeric),
            _ => false,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn count_labels(&self, out: &mut Vec<String>) {
        if let Some(l) = &self.label {
            out.push(l.clone());
        }
        self.children.iter().for_each(|c| c.count_labels(out));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Section {
    If,
    Except,
    Then,
    Else,
}

impl Section {
    pub const ALL: [Section; 4] = [Section::If, Section::Except, Section::Then, Section::Else];

    pub fn keyword(self) -> &'static str {
        match self {
            Section::If => "IF",
            Section::Except => "EXCEPT",
            Section::Then => "THEN",
            Section::Else => "ELSE",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Section> {
        Section::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn is_outcome(self) -> bool {
        matches!(self, Section::Then | Section::Else)
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleAst {
    pub rule_id: String,
    pub if_clauses: Vec<Clause>,
    pub except_clauses: Vec<Clause>,
    pub then_outcomes: Vec<Clause>,
    pub else_outcomes: Vec<Clause>,
}

impl RuleAst {
    pub fn section(&self, s: Section) -> &[Clause] {
        match s {
            Section::If => &self.if_clauses,
            Section::Except => &self.except_clauses,
            Section::Then => &self.then_outcomes,
            Section::Else => &self.else_outcomes,
        }
    }

    pub(crate) fn section_mut(&mut self, s: Section) -> &mut Vec<Clause> {
        match s {
            Section::If => &mut self.if_clauses,
            Section::Except => &mut self.except_clauses,
            Section::Then => &mut self.then_outcomes,
            Section::Else => &mut self.else_outcomes,
        }
    }

    /// Every label in document order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in Section::ALL {
            self.section(s).iter().for_each(|c| c.count_labels(&mut out));
        }
        out
    }

    /// Visits every clause with its path (`IF.A.b.i`), section and depth.
    pub fn walk<'a>(&'a self, mut f: impl FnMut(&str, &'a Clause, Section, usize)) {
        fn go<'a>(
            list: &'a [Clause],
            prefix: &str,
            section: Section,
            depth: usize,
            f: &mut dyn FnMut(&str, &'a Clause, Section, usize),
        ) {
            for (i, c) in list.iter().enumerate() {
                let path = child_path(prefix, c, i);
                f(&path, c, section, depth);
                go(&c.children, &path, section, depth + 1, f);
            }
        }
        for s in Section::ALL {
            go(self.section(s), s.keyword(), s, 0, &mut f);
        }
    }

    /// Looks a clause up by its full path.
    pub fn clause_at(&self, path: &str) -> Option<&Clause> {
        let mut found = None;
        self.walk(|p, c, _, _| {
            if p == path {
                found = Some(c);
            }
        });
        found
    }
}

/// Path segment for a clause: its label, or `#n` (1-based) when unlabeled.
pub fn child_path(prefix: &str, clause: &Clause, index: usize) -> String {
    match &clause.label {
        Some(l) => format!("{prefix}.{l}"),
        None => format!("{prefix}.#{}", index + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("{line}:{col}: duplicate label `{label}`")]
    DuplicateLabel { label: String, line: usize, col: usize },
    #[error("variable `{0}` is bound to clauses with different text")]
    NamingConflict(String),
    #[error("naming key `{0}` does not match exactly one clause")]
    UnknownPath(String),
}

impl DslError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            DslError::Syntax { line, col, .. } | DslError::DuplicateLabel { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }

    /// Message without the position prefix.
    pub fn message(&self) -> String {
        match self {
            DslError::Syntax { expected, .. } => format!("expected {expected}"),
            DslError::DuplicateLabel { label, .. } => format!("duplicate label `{label}`"),
            other => other.to_string(),
        }
    }

    /// Shifts the line number (for bodies embedded in a larger file).
    pub fn offset_lines(self, by: usize) -> DslError {
        match self {
            DslError::Syntax { line, col, expected } => DslError::Syntax { line: line + by, col, expected },
            DslError::DuplicateLabel { label, line, col } => DslError::DuplicateLabel { label, line: line + by, col },
            other => other,
        }
    }
}
