use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A Boolean expression over named variables.
///
/// `And`/`Or` nodes built through [`BoolExpr::and`] and [`BoolExpr::or`] always
/// carry at least two children; those constructors collapse smaller lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoolExpr {
    False,
    True,
    Var(String),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn var(id: impl Into<String>) -> Self {
        BoolExpr::Var(id.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    /// Conjunction of `items`; an empty list is `True`, a single item is returned as is.
    pub fn and(mut items: Vec<BoolExpr>) -> Self {
        match items.len() {
            0 => BoolExpr::True,
            1 => items.pop().unwrap(),
            _ => BoolExpr::And(items),
        }
    }

    /// Disjunction of `items`; an empty list is `False`, a single item is returned as is.
    pub fn or(mut items: Vec<BoolExpr>) -> Self {
        match items.len() {
            0 => BoolExpr::False,
            1 => items.pop().unwrap(),
            _ => BoolExpr::Or(items),
        }
    }

    pub fn is_compound(&self) -> bool {
        matches!(self, BoolExpr::And(_) | BoolExpr::Or(_))
    }

    /// Every variable id mentioned in the expression.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Var(v) => {
                out.insert(v.clone());
            }
            BoolExpr::Not(c) => c.collect_vars(out),
            BoolExpr::And(cs) | BoolExpr::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    /// Evaluates under a total valuation.
    pub fn eval_with<F: Fn(&str) -> bool + Copy>(&self, value: F) -> bool {
        match self {
            BoolExpr::True => true,
            BoolExpr::False => false,
            BoolExpr::Var(v) => value(v),
            BoolExpr::Not(c) => !c.eval_with(value),
            BoolExpr::And(cs) => cs.iter().all(|c| c.eval_with(value)),
            BoolExpr::Or(cs) => cs.iter().any(|c| c.eval_with(value)),
        }
    }

    /// Replaces every `Var(id)` for which `f` returns `Some`.
    pub fn substitute<F: Fn(&str) -> Option<BoolExpr> + Copy>(&self, f: F) -> BoolExpr {
        match self {
            BoolExpr::True | BoolExpr::False => self.clone(),
            BoolExpr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            BoolExpr::Not(c) => BoolExpr::not(c.substitute(f)),
            BoolExpr::And(cs) => BoolExpr::And(cs.iter().map(|c| c.substitute(f)).collect()),
            BoolExpr::Or(cs) => BoolExpr::Or(cs.iter().map(|c| c.substitute(f)).collect()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::Var(_) => 1,
            BoolExpr::Not(c) => 1 + c.depth(),
            BoolExpr::And(cs) | BoolExpr::Or(cs) => 1 + cs.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    /// Light canonicalization: flattens nested same-operator nodes, removes double
    /// negation, folds constants, drops duplicate operands and sorts operands.
    ///
    /// The result is logically equivalent to `self`.
    pub fn normalize(&self) -> BoolExpr {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::Var(_) => self.clone(),
            BoolExpr::Not(c) => match c.normalize() {
                BoolExpr::Not(inner) => *inner,
                BoolExpr::True => BoolExpr::False,
                BoolExpr::False => BoolExpr::True,
                other => BoolExpr::not(other),
            },
            BoolExpr::And(cs) => normalize_nary(cs, true),
            BoolExpr::Or(cs) => normalize_nary(cs, false),
        }
    }

    /// Like [`BoolExpr::normalize`] but keeps operand order (first occurrence wins on duplicates).
    pub fn flatten(&self) -> BoolExpr {
        match self {
            BoolExpr::True | BoolExpr::False | BoolExpr::Var(_) => self.clone(),
            BoolExpr::Not(c) => match c.flatten() {
                BoolExpr::Not(inner) => *inner,
                BoolExpr::True => BoolExpr::False,
                BoolExpr::False => BoolExpr::True,
                other => BoolExpr::not(other),
            },
            BoolExpr::And(cs) => flatten_nary(cs, true, false),
            BoolExpr::Or(cs) => flatten_nary(cs, false, false),
        }
    }

    pub fn display(&self, symbols: Symbols) -> ExprDisplay<'_> {
        ExprDisplay { expr: self, symbols }
    }
}

fn normalize_nary(children: &[BoolExpr], is_and: bool) -> BoolExpr {
    flatten_nary(children, is_and, true)
}

fn flatten_nary(children: &[BoolExpr], is_and: bool, sort: bool) -> BoolExpr {
    // `absorbing` short-circuits the node, `neutral` operands are dropped.
    let (absorbing, neutral) = if is_and {
        (BoolExpr::False, BoolExpr::True)
    } else {
        (BoolExpr::True, BoolExpr::False)
    };
    let mut flat = Vec::with_capacity(children.len());
    for child in children {
        let child = if sort { child.normalize() } else { child.flatten() };
        match child {
            BoolExpr::And(inner) if is_and => flat.extend(inner),
            BoolExpr::Or(inner) if !is_and => flat.extend(inner),
            e if e == absorbing => return absorbing,
            e if e == neutral => {}
            e => flat.push(e),
        }
    }
    if sort {
        flat.sort();
        flat.dedup();
    } else {
        let mut seen = Vec::with_capacity(flat.len());
        flat.retain(|e| {
            let fresh = !seen.contains(e);
            if fresh {
                seen.push(e.clone());
            }
            fresh
        });
    }
    if is_and {
        BoolExpr::and(flat)
    } else {
        BoolExpr::or(flat)
    }
}

/// Operator spelling used when rendering expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symbols {
    #[default]
    Unicode,
    Ascii,
}

impl Symbols {
    fn and(self) -> &'static str {
        match self {
            Symbols::Unicode => " ∧ ",
            Symbols::Ascii => " & ",
        }
    }
    fn or(self) -> &'static str {
        match self {
            Symbols::Unicode => " ∨ ",
            Symbols::Ascii => " | ",
        }
    }
    fn not(self) -> &'static str {
        match self {
            Symbols::Unicode => "¬",
            Symbols::Ascii => "!",
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a BoolExpr,
    symbols: Symbols,
}

impl ExprDisplay<'_> {
    fn write(&self, e: &BoolExpr, nested: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            BoolExpr::True => f.write_str("true"),
            BoolExpr::False => f.write_str("false"),
            BoolExpr::Var(v) => f.write_str(v),
            BoolExpr::Not(c) => {
                f.write_str(self.symbols.not())?;
                self.write(c, true, f)
            }
            BoolExpr::And(cs) | BoolExpr::Or(cs) => {
                let sep = if matches!(e, BoolExpr::And(_)) {
                    self.symbols.and()
                } else {
                    self.symbols.or()
                };
                if nested {
                    f.write_str("(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.write(c, true, f)?;
                }
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, false, f)
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(Symbols::Unicode).fmt(f)
    }
}
