use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Guard, LawmapError, LawmapGraph, NodeKind};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// DOT digraph: START circle, CONDITION diamonds, OUTCOME boxes, yes/no branches.
pub fn export_dot(g: &LawmapGraph) -> String {
    render(g, &[])
}

/// As [`export_dot`], with the nodes and edges of `path` drawn bold red.
pub fn export_dot_traced(g: &LawmapGraph, path: &[String]) -> String {
    render(g, path)
}

fn render(g: &LawmapGraph, path: &[String]) -> String {
    let on_path: BTreeSet<&str> = path.iter().map(String::as_str).collect();
    let path_edges: BTreeSet<(&str, &str)> = path.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect();
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&g.rule_id)).unwrap();
    if !g.citations.is_empty() {
        writeln!(out, "  comment={};", quote(&g.citations.join("; "))).unwrap();
    }
    out.push_str("  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\"];\n");
    for n in &g.nodes {
        let (shape, label) = match n.kind {
            NodeKind::Start => ("circle", n.label.clone()),
            NodeKind::Condition => ("diamond", format!("{}\n{}", n.var.as_deref().unwrap_or_default(), n.label)),
            NodeKind::Outcome if n.decisions.is_empty() => ("box", n.label.clone()),
            NodeKind::Outcome => ("box", format!("{}\n{}", n.decisions.join(", "), n.label)),
        };
        let mut attrs = vec![format!("shape={shape}"), format!("label={}", quote(&label))];
        if n.is_sink() {
            attrs.push("style=dashed".into());
        }
        if on_path.contains(n.id.as_str()) {
            attrs.push("color=red".into());
            attrs.push("penwidth=2".into());
        }
        writeln!(out, "  {} [{}];", quote(&n.id), attrs.join(", ")).unwrap();
    }
    for e in &g.edges {
        let mut attrs = Vec::new();
        match e.guard {
            Guard::TrueBranch => attrs.push("label=\"yes\"".to_string()),
            Guard::FalseBranch => attrs.push("label=\"no\"".to_string()),
            Guard::Always => {}
        }
        if path_edges.contains(&(e.from.as_str(), e.to.as_str())) {
            attrs.push("color=red".into());
            attrs.push("penwidth=2".into());
        }
        let tail = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        writeln!(out, "  {} -> {}{};", quote(&e.from), quote(&e.to), tail).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Canonical JSON with sorted keys and a trailing newline.
pub fn export_json(g: &LawmapGraph) -> String {
    let value = serde_json::to_value(g).expect("lawmap serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("json value serializes");
    s.push('\n');
    s
}

/// Parses and validates a graph written by [`export_json`].
pub fn import_json(text: &str) -> Result<LawmapGraph, LawmapError> {
    let g: LawmapGraph = serde_json::from_str(text).map_err(|e| LawmapError::Json(e.to_string()))?;
    g.validate()?;
    Ok(g)
}
