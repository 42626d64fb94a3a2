use crate::rule_dsl::{child_path, Clause, Connective, RuleAst, Section};

use super::equations::{Equation, NamedFold, RuleEquations, VariableTable};
use super::expr::BoolExpr;
use super::BoolError;

struct Folder<'a> {
    rule_id: &'a str,
    table: &'a VariableTable,
    folds: Vec<NamedFold>,
}

impl Folder<'_> {
    fn clause(&mut self, c: &Clause, path: &str) -> Result<BoolExpr, BoolError> {
        if let Some(id) = self.table.binding(path) {
            return Ok(BoolExpr::var(id));
        }
        if c.is_leaf() {
            return Err(BoolError::UnboundVariable(path.to_string()));
        }
        let expr = self.list(&c.children, path)?;
        self.folds.push(NamedFold {
            id: format!("{}.{}", self.rule_id, path),
            label: c.text.clone(),
            expr: expr.clone(),
        });
        Ok(expr)
    }

    /// `And` binds tighter than `Or` between siblings.
    fn list(&mut self, list: &[Clause], prefix: &str) -> Result<BoolExpr, BoolError> {
        let mut runs = Vec::new();
        let mut run = Vec::new();
        for (i, c) in list.iter().enumerate() {
            run.push(self.clause(c, &child_path(prefix, c, i))?);
            if c.connective == Connective::Or {
                runs.push(BoolExpr::and(std::mem::take(&mut run)));
            }
        }
        if !run.is_empty() {
            runs.push(BoolExpr::and(run));
        }
        Ok(BoolExpr::or(runs))
    }

    fn section(&mut self, ast: &RuleAst, s: Section) -> Result<BoolExpr, BoolError> {
        let list = ast.section(s);
        let expr = self.list(list, s.keyword())?;
        if list.len() > 1 {
            self.folds.push(NamedFold {
                id: format!("{}.{}", self.rule_id, s.keyword()),
                label: s.keyword().to_string(),
                expr: expr.clone(),
            });
        }
        Ok(expr)
    }

    fn guards(&mut self, outcome: &Clause, path: &str) -> Result<Vec<BoolExpr>, BoolError> {
        let mut out = Vec::new();
        for (j, q) in outcome.children.iter().enumerate().filter(|(_, q)| q.is_qualifier()) {
            out.push(self.clause(q, &child_path(path, q, j))?);
        }
        Ok(out)
    }
}

/// Builds one equation per outcome: THEN outcomes are `A* ∧ C*`, ELSE outcomes
/// `A* ∧ ¬C*`, each conjoined with its "Where" qualifiers. Without an
/// exception THEN outcomes are `false` and ELSE outcomes are `A*`.
pub fn compile(ast: &RuleAst, table: &VariableTable) -> Result<RuleEquations, BoolError> {
    if ast.else_outcomes.is_empty() {
        return Err(BoolError::NoOutcome);
    }
    let mut folder = Folder {
        rule_id: &ast.rule_id,
        table,
        folds: Vec::new(),
    };
    let antecedent = folder.section(ast, Section::If)?;
    let exception = if ast.except_clauses.is_empty() {
        None
    } else {
        Some(folder.section(ast, Section::Except)?)
    };

    let mut equations = Vec::new();
    for s in [Section::Then, Section::Else] {
        for (i, o) in ast.section(s).iter().enumerate() {
            let path = child_path(s.keyword(), o, i);
            let decision = table
                .binding(&path)
                .ok_or_else(|| BoolError::UnboundVariable(path.clone()))?
                .to_string();
            let guards = folder.guards(o, &path)?;
            let mut terms = vec![antecedent.clone()];
            match (&exception, s) {
                (None, Section::Then) => terms = vec![BoolExpr::False],
                (None, _) => {}
                (Some(c), Section::Then) => terms.push(c.clone()),
                (Some(c), _) => terms.push(BoolExpr::not(c.clone())),
            }
            if terms != [BoolExpr::False] {
                terms.extend(guards);
            }
            equations.push(Equation {
                decision,
                expr: BoolExpr::and(terms),
            });
        }
    }

    let mut eqs = RuleEquations::new(ast.rule_id.clone(), table.clone(), equations)?;
    eqs.antecedent = Some(antecedent);
    eqs.folds = folder.folds;
    Ok(eqs)
}
