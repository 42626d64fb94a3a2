//! Text form of equations: one `decision = expr` per line.
//!
//! Accepted operators: `∧ & × *` for conjunction, `∨ | +` for disjunction and
//! `¬ ! ~ ∼` for negation; `AND`/`OR`/`NOT` words work too. Negation binds
//! tightest, then conjunction, then disjunction. `#` starts a comment.

use super::equations::{Equation, RuleEquations, Variable, VariableKind, VariableTable};
use super::expr::BoolExpr;
use super::BoolError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    And,
    Or,
    Not,
    LParen,
    RParen,
    True,
    False,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '/' | '\'')
}

fn tokenize(src: &str, line: usize) -> Result<Vec<(Tok, usize)>, BoolError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '∧' | '&' | '×' | '*' => out.push((Tok::And, col)),
            '∨' | '|' | '+' => out.push((Tok::Or, col)),
            '¬' | '!' | '~' | '∼' => out.push((Tok::Not, col)),
            '(' => out.push((Tok::LParen, col)),
            ')' => out.push((Tok::RParen, col)),
            '⊤' => out.push((Tok::True, col)),
            '⊥' => out.push((Tok::False, col)),
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "AND" => Tok::And,
                    "OR" => Tok::Or,
                    "NOT" => Tok::Not,
                    "true" | "TRUE" | "1" => Tok::True,
                    "false" | "FALSE" | "0" => Tok::False,
                    _ => Tok::Ident(word),
                };
                out.push((tok, start + 1));
                continue;
            }
            other => {
                return Err(BoolError::Parse {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct ExprParser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl ExprParser {
    fn err(&self, message: impl Into<String>) -> BoolError {
        let col = self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col);
        BoolError::Parse {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn or(&mut self) -> Result<BoolExpr, BoolError> {
        let mut items = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            items.push(self.and()?);
        }
        Ok(BoolExpr::or(items))
    }

    fn and(&mut self) -> Result<BoolExpr, BoolError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(BoolExpr::and(items))
    }

    fn unary(&mut self) -> Result<BoolExpr, BoolError> {
        if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            return Ok(BoolExpr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<BoolExpr, BoolError> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                Ok(BoolExpr::Var(id))
            }
            Some(Tok::True) => {
                self.pos += 1;
                Ok(BoolExpr::True)
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(BoolExpr::False)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.err("expected variable, constant or `(`")),
        }
    }
}

fn parse_expr_at(src: &str, line: usize, col_offset: usize) -> Result<BoolExpr, BoolError> {
    let mut toks = tokenize(src, line)?;
    for t in &mut toks {
        t.1 += col_offset;
    }
    let mut p = ExprParser {
        toks,
        pos: 0,
        line,
        end_col: col_offset + src.chars().count() + 1,
    };
    let e = p.or()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<BoolExpr, BoolError> {
    parse_expr_at(src, 1, 0)
}

/// Parses `decision = expr` lines into ordered pairs.
pub fn parse_equation_lines(text: &str) -> Result<Vec<(String, BoolExpr)>, BoolError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = content.split_once('=').ok_or(BoolError::Parse {
            line,
            col: 1,
            message: "expected `decision = expression`".into(),
        })?;
        let id = lhs.trim();
        if id.is_empty() || !id.chars().all(is_ident_char) {
            return Err(BoolError::Parse {
                line,
                col: 1,
                message: format!("invalid decision id `{id}`"),
            });
        }
        let offset = lhs.chars().count() + 1;
        out.push((id.to_string(), parse_expr_at(rhs, line, offset)?));
    }
    Ok(out)
}

impl RuleEquations {
    /// Builds an equation set from text. Left-hand sides become decision variables;
    /// every other id becomes a factual input unless `table` already declares it.
    pub fn from_text(rule_id: impl Into<String>, text: &str, table: Option<&VariableTable>) -> Result<Self, BoolError> {
        let lines = parse_equation_lines(text)?;
        let mut vt = VariableTable::new();
        for (d, _) in &lines {
            let description = table
                .and_then(|t| t.get(d))
                .map(|v| v.description.clone())
                .unwrap_or_default();
            vt.insert(Variable {
                id: d.clone(),
                kind: VariableKind::Decision,
                description,
            })?;
        }
        for (_, e) in &lines {
            for v in e.vars() {
                if vt.contains(&v) {
                    continue;
                }
                let known = table.and_then(|t| t.get(&v)).filter(|k| k.kind.is_input());
                vt.insert(Variable {
                    id: v.clone(),
                    kind: known.map(|k| k.kind).unwrap_or(VariableKind::Factual),
                    description: known.map(|k| k.description.clone()).unwrap_or_default(),
                })?;
            }
        }
        let equations = lines
            .into_iter()
            .map(|(decision, expr)| Equation { decision, expr })
            .collect();
        RuleEquations::new(rule_id, vt, equations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::Symbols;

    #[test]
    fn parses_times_tilde_notation() {
        let e = parse_expr("(A × B) × ∼C").unwrap();
        assert_eq!(e.to_string(), "(A ∧ B) ∧ ¬C");
        let e = parse_expr("q + (r + s)").unwrap();
        assert_eq!(e.to_string(), "q ∨ (r ∨ s)");
    }

    #[test]
    fn precedence_not_and_or() {
        let e = parse_expr("!a & b | c").unwrap();
        assert_eq!(e.display(Symbols::Ascii).to_string(), "(!a & b) | c");
    }

    #[test]
    fn print_parse_round_trip() {
        let src = "B = (q ∨ (r ∨ s)) ∧ y\nD = (q ∨ (r ∨ s)) ∧ ¬y\n";
        let eqs = RuleEquations::from_text("r1", src, None).unwrap();
        assert_eq!(eqs.to_text(Symbols::Unicode), src);
        let ascii = eqs.to_text(Symbols::Ascii);
        let again = RuleEquations::from_text("r1", &ascii, None).unwrap();
        assert_eq!(again.equations, eqs.equations);
    }

    #[test]
    fn reports_position() {
        let err = parse_equation_lines("X = A ∧\n").unwrap_err();
        match err {
            BoolError::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decision_references_resolve() {
        let eqs = RuleEquations::from_text("r3", "E = u & !p\nF = E & x\n", None).unwrap();
        assert!(eqs.table.is_decision("E"));
        assert_eq!(eqs.expanded("F").unwrap().to_string(), "(u ∧ ¬p) ∧ x");
        assert_eq!(eqs.input_vars(), vec!["p", "u", "x"]);
    }

    #[test]
    fn cyclic_definitions_are_rejected() {
        let err = RuleEquations::from_text("c", "X = Y & a\nY = X\n", None).unwrap_err();
        assert!(matches!(err, BoolError::CyclicDefinition(_)));
    }
}
