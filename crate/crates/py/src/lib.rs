//! Python bindings: `import lexroad`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use lexroad_core::bayes::{self, BnError, InferenceMethod};
use lexroad_core::boolean::{self, Assignment, RuleEquations, Symbols, Truth};
use lexroad_core::lawmap::{self, LawmapError};
use lexroad_core::report::{sha256_hex, ComplianceReport, ReportError};
use lexroad_core::rule_dsl::pretty_print;
use lexroad_core::rulepack::{self, CompiledRule, RulepackError};

create_exception!(lexroad, LexroadError, PyException);
create_exception!(lexroad, RuleSyntaxError, LexroadError);
create_exception!(lexroad, CompileError, LexroadError);
create_exception!(lexroad, IncompleteScenarioError, LexroadError);
create_exception!(lexroad, InferenceError, LexroadError);
create_exception!(lexroad, IntegrityError, LexroadError);

fn rule_err(e: RulepackError) -> PyErr {
    match e {
        RulepackError::Io { .. } | RulepackError::Parse { .. } => RuleSyntaxError::new_err(e.to_string()),
        RulepackError::Naming { .. } | RulepackError::Compile { .. } => CompileError::new_err(e.to_string()),
        other => IntegrityError::new_err(other.to_string()),
    }
}

fn bn_err(e: BnError) -> PyErr {
    InferenceError::new_err(e.to_string())
}

fn lawmap_err(e: LawmapError) -> PyErr {
    match e {
        LawmapError::IncompleteAssignment(missing) => {
            IncompleteScenarioError::new_err(format!("missing: {}", missing.join(", ")))
        }
        other => CompileError::new_err(other.to_string()),
    }
}

type TableRow = (BTreeMap<String, bool>, BTreeMap<String, bool>);

fn truth(t: Truth) -> Option<bool> {
    t.as_bool()
}

fn assignment(eqs: &RuleEquations, facts: &BTreeMap<String, Option<bool>>) -> PyResult<Assignment> {
    let inputs = eqs.input_vars();
    let mut asg = Assignment::new();
    for (k, v) in facts {
        if !inputs.contains(k) {
            return Err(LexroadError::new_err(format!("`{k}` is not an input of {}", eqs.rule_id)));
        }
        if let Some(v) = v {
            asg.set(k, *v);
        }
    }
    Ok(asg)
}

fn symbols(ascii: bool) -> Symbols {
    if ascii {
        Symbols::Ascii
    } else {
        Symbols::Unicode
    }
}

/// A compiled rule: AST, variable table and equations.
#[pyclass(module = "lexroad", frozen)]
struct Rule {
    inner: CompiledRule,
}

#[pymethods]
impl Rule {
    #[getter]
    fn rule_id(&self) -> String {
        self.inner.rule_id().to_string()
    }

    #[getter]
    fn title(&self) -> String {
        self.inner.file.source.title.clone()
    }

    #[getter]
    fn citations(&self) -> Vec<String> {
        self.inner.file.source.citations.clone()
    }

    #[getter]
    fn decisions(&self) -> Vec<String> {
        self.inner.equations.decisions().map(str::to_string).collect()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.inner.equations.input_vars()
    }

    /// Variable id to `(kind, description)`.
    fn variables(&self) -> BTreeMap<String, (String, String)> {
        self.inner
            .equations
            .table
            .variables()
            .iter()
            .map(|v| (v.id.clone(), (format!("{:?}", v.kind).to_uppercase(), v.description.clone())))
            .collect()
    }

    /// Decision id to equation text.
    #[pyo3(signature = (ascii = false))]
    fn equations(&self, ascii: bool) -> BTreeMap<String, String> {
        self.inner
            .equations
            .equations
            .iter()
            .map(|e| (e.decision.clone(), e.expr.display(symbols(ascii)).to_string()))
            .collect()
    }

    #[pyo3(signature = (ascii = false))]
    fn equations_text(&self, ascii: bool) -> String {
        self.inner.equations.to_text(symbols(ascii))
    }

    fn pretty(&self) -> String {
        pretty_print(&self.inner.ast)
    }

    /// Kleene evaluation; missing or `None` facts are unknown.
    fn evaluate(&self, facts: BTreeMap<String, Option<bool>>) -> PyResult<BTreeMap<String, Option<bool>>> {
        let asg = assignment(&self.inner.equations, &facts)?;
        Ok(boolean::evaluate(&self.inner.equations, &asg)
            .into_iter()
            .map(|(k, t)| (k, truth(t)))
            .collect())
    }

    /// Rows of `(inputs, decisions)` over the sorted input ids.
    fn truth_table(&self) -> PyResult<Vec<TableRow>> {
        let t = boolean::truth_table(&self.inner.equations).map_err(|e| CompileError::new_err(e.to_string()))?;
        Ok(t.rows
            .iter()
            .map(|r| {
                (
                    t.vars.iter().cloned().zip(r.inputs.iter().copied()).collect(),
                    t.decisions.iter().cloned().zip(r.decisions.iter().copied()).collect(),
                )
            })
            .collect())
    }

    /// Pairs of decisions that can hold together.
    fn overlapping_pairs(&self) -> PyResult<Vec<(String, String)>> {
        let r = boolean::check_properties(&self.inner.equations).map_err(|e| CompileError::new_err(e.to_string()))?;
        Ok(r.pairs
            .into_iter()
            .filter(|p| !p.mutually_exclusive)
            .map(|p| (p.first, p.second))
            .collect())
    }

    fn lawmap(&self) -> PyResult<Lawmap> {
        let graph = lawmap::build_lawmap(&self.inner.equations, &self.inner.ast)
            .map_err(lawmap_err)?
            .with_citations(&self.inner.file.source.citations);
        Ok(Lawmap { graph })
    }

    #[pyo3(signature = (priors = None))]
    fn bayes_net(&self, priors: Option<BTreeMap<String, f64>>) -> PyResult<BayesNet> {
        let net = bayes::build_bn(&self.inner.equations, &priors.unwrap_or_default()).map_err(bn_err)?;
        Ok(BayesNet {
            net,
            equations: self.inner.equations.clone(),
        })
    }

    fn __repr__(&self) -> String {
        format!("Rule('{}', decisions={:?})", self.inner.rule_id(), self.decisions())
    }
}

#[pyclass(module = "lexroad", frozen)]
struct Lawmap {
    graph: lexroad_core::lawmap::LawmapGraph,
}

#[pymethods]
impl Lawmap {
    /// DOT text, with the path for `facts` highlighted when given.
    #[pyo3(signature = (facts = None))]
    fn to_dot(&self, facts: Option<BTreeMap<String, bool>>) -> PyResult<String> {
        match facts {
            None => Ok(lawmap::export_dot(&self.graph)),
            Some(f) => {
                let path = self.trace(f)?;
                Ok(lawmap::export_dot_traced(&self.graph, &path))
            }
        }
    }

    fn to_json(&self) -> String {
        lawmap::export_json(&self.graph)
    }

    /// Node ids from START to the outcome chosen by `facts`.
    fn trace(&self, facts: BTreeMap<String, bool>) -> PyResult<Vec<String>> {
        let asg = Assignment::from_bools(facts.iter().map(|(k, v)| (k.as_str(), *v)));
        lawmap::trace_path(&self.graph, &asg).map_err(lawmap_err)
    }

    /// Decisions at the outcome reached by `facts`; empty when out of scope.
    fn outcome(&self, facts: BTreeMap<String, bool>) -> PyResult<Vec<String>> {
        let path = self.trace(facts)?;
        let end = path.last().and_then(|id| self.graph.node(id));
        Ok(end.map(|n| n.decisions.clone()).unwrap_or_default())
    }

    fn paths(&self) -> Vec<Vec<String>> {
        self.graph.paths()
    }
}

#[pyclass(module = "lexroad", frozen)]
struct BayesNet {
    net: lexroad_core::bayes::BayesNet,
    equations: RuleEquations,
}

#[pymethods]
impl BayesNet {
    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.net.nodes.iter().map(|n| n.id.clone()).collect()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.net.edges()
    }

    /// `P(node = true | evidence)` for every node. `method` is `auto`,
    /// `enumeration` or `elimination`.
    #[pyo3(signature = (evidence = None, method = "auto"))]
    fn infer(&self, evidence: Option<BTreeMap<String, bool>>, method: &str) -> PyResult<BTreeMap<String, f64>> {
        let method = match method {
            "auto" => InferenceMethod::Auto,
            "enumeration" => InferenceMethod::Enumeration,
            "elimination" => InferenceMethod::VariableElimination,
            other => return Err(LexroadError::new_err(format!("unknown method `{other}`"))),
        };
        bayes::infer_with(&self.net, &evidence.unwrap_or_default(), method).map_err(bn_err)
    }

    /// `(agreeing, total, validated)`: evidence sets that match Boolean
    /// evaluation and equations confirmed by instantiation.
    fn validate(&self) -> PyResult<(usize, usize, usize)> {
        let r = bayes::validate_bn(&self.net, &self.equations).map_err(bn_err)?;
        Ok((r.agreeing_sets, r.evidence_sets, r.validated()))
    }

    fn to_json(&self) -> String {
        self.net.to_json()
    }
}

/// A loaded rule pack directory.
#[pyclass(module = "lexroad", frozen)]
struct Rulepack {
    pack: lexroad_core::rulepack::Rulepack,
}

#[pymethods]
impl Rulepack {
    #[new]
    fn new(path: PathBuf) -> PyResult<Rulepack> {
        Ok(Rulepack {
            pack: rulepack::load_rulepack(&path).map_err(rule_err)?,
        })
    }

    #[getter]
    fn rule_ids(&self) -> Vec<String> {
        self.pack.entries.iter().map(|e| e.rule_id().to_string()).collect()
    }

    #[getter]
    fn vehicles(&self) -> Vec<String> {
        self.pack.profiles.iter().map(|p| p.vehicle_id.clone()).collect()
    }

    #[getter]
    fn groups(&self) -> Vec<String> {
        self.pack.checklists.iter().map(|c| c.group.clone()).collect()
    }

    /// A rule by id or file stem.
    fn rule(&self, id: &str) -> PyResult<Rule> {
        let e = self
            .pack
            .entry(id)
            .ok_or_else(|| LexroadError::new_err(format!("no rule `{id}` in the pack")))?;
        Ok(Rule { inner: e.rule.clone() })
    }

    /// `(group, rating, rationale)` per checklist for one vehicle.
    fn rate(&self, vehicle_id: &str) -> PyResult<Vec<(String, String, String)>> {
        let p = self
            .pack
            .profile(vehicle_id)
            .ok_or_else(|| LexroadError::new_err(format!("no vehicle `{vehicle_id}` in the pack")))?;
        Ok(self
            .pack
            .rate_all(p)
            .map_err(rule_err)?
            .into_iter()
            .map(|r| (r.rule_group, r.rating.as_str().to_string(), r.rationale))
            .collect())
    }

    /// The compliance report over every shipped profile.
    #[pyo3(signature = (format = "text", ascii = false))]
    fn check(&self, format: &str, ascii: bool) -> PyResult<String> {
        let report = ComplianceReport::build(&self.pack, &self.pack.profiles, &self.pack.scenarios, self.pack.digests.clone())
            .map_err(|e| match e {
                ReportError::Rulepack(e) => rule_err(e),
                other => IntegrityError::new_err(other.to_string()),
            })?;
        match format {
            "text" => Ok(report.to_text(ascii)),
            "json" => Ok(report.to_json()),
            other => Err(LexroadError::new_err(format!("unknown format `{other}`"))),
        }
    }
}

/// Compiles `.rule` text. With `rule_id`, `text` is a bare rule body.
#[pyfunction]
#[pyo3(signature = (text, rule_id = None))]
fn compile_rule(text: &str, rule_id: Option<&str>) -> PyResult<Rule> {
    let full = match rule_id {
        Some(id) => format!("rule: {id}\n\n{text}"),
        None => text.to_string(),
    };
    let inner = rulepack::compile_rule_text("<string>", &full).map_err(rule_err)?;
    Ok(Rule { inner })
}

#[pyfunction]
fn load_rule(path: PathBuf) -> PyResult<Rule> {
    let inner = rulepack::compile_rule_file(&path).map_err(rule_err)?;
    Ok(Rule { inner })
}

#[pyfunction]
fn sha256(data: &[u8]) -> String {
    sha256_hex(data)
}

#[pymodule]
fn lexroad(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("LexroadError", py.get_type::<LexroadError>())?;
    m.add("RuleSyntaxError", py.get_type::<RuleSyntaxError>())?;
    m.add("CompileError", py.get_type::<CompileError>())?;
    m.add("IncompleteScenarioError", py.get_type::<IncompleteScenarioError>())?;
    m.add("InferenceError", py.get_type::<InferenceError>())?;
    m.add("IntegrityError", py.get_type::<IntegrityError>())?;
    m.add_class::<Rule>()?;
    m.add_class::<Lawmap>()?;
    m.add_class::<BayesNet>()?;
    m.add_class::<Rulepack>()?;
    m.add_function(wrap_pyfunction!(compile_rule, m)?)?;
    m.add_function(wrap_pyfunction!(load_rule, m)?)?;
    m.add_function(wrap_pyfunction!(sha256, m)?)?;
    Ok(())
}
