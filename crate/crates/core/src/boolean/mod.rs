//! Boolean expressions, per-decision rule equations, Kleene evaluation and
//! exhaustive truth-table checks.

mod compile;
mod equations;
mod eval;
mod expr;
mod table;
mod text;

pub use compile::compile;
pub use equations::{Equation, NamedFold, RuleEquations, Variable, VariableKind, VariableTable};
pub use eval::{eval_kleene, evaluate, Assignment, Truth};
pub(crate) use eval::IndexedExpr;
pub use expr::{BoolExpr, ExprDisplay, Symbols};
pub use table::{
    check_properties, equations_equivalent, expr_counterexample, truth_table, Mismatch, PairExclusivity,
    PropertyReport, TruthRow, TruthTable, MAX_TABLE_VARS,
};
pub(crate) use table::rows;
pub use text::{parse_equation_lines, parse_expr};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("rule has no ELSE outcome")]
    NoOutcome,
    #[error("too many input variables for exhaustive enumeration: {0} (limit {MAX_TABLE_VARS})")]
    TooManyVariables(usize),
    #[error("decision `{0}` is defined in terms of itself")]
    CyclicDefinition(String),
    #[error("`{0}` is not a decision variable")]
    NotADecision(String),
    #[error("decision `{0}` has more than one equation")]
    DuplicateEquation(String),
    #[error("decision `{0}` has no equation")]
    MissingEquation(String),
    #[error("variable `{0}` is used both as an input and as a decision")]
    KindConflict(String),
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
}
