//! Label-level dependency graph, DOT and JSON output, and lints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::infer::Analysis;
use crate::store::{merged_nodes, NodeStore, Part};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Vertex {
    pub env: String,
    pub statement_ok: bool,
    pub proof_ok: Option<bool>,
    pub upstream: bool,
    pub not_ready: bool,
    /// False for labels referenced by `\uses` that have no node.
    pub known: bool,
}

impl Vertex {
    pub fn unknown() -> Vertex {
        Vertex {
            env: "unknown".into(),
            statement_ok: false,
            proof_ok: None,
            upstream: false,
            not_ready: false,
            known: false,
        }
    }

    /// Green in the rendered graph.
    pub fn is_proved(&self) -> bool {
        self.statement_ok && self.proof_ok.unwrap_or(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Statement,
    Proof,
}

impl From<Part> for EdgeKind {
    fn from(p: Part) -> Self {
        match p {
            Part::Statement => EdgeKind::Statement,
            Part::Proof => EdgeKind::Proof,
        }
    }
}

/// `from` is used by `to`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepGraph {
    pub vertices: BTreeMap<String, Vertex>,
    pub edges: BTreeSet<Edge>,
}

impl DepGraph {
    /// Adds `from -> to`, synthesizing an unknown vertex for a missing
    /// endpoint. Self-edges are ignored.
    pub fn add_edge(&mut self, from: &str, to: &str, kind: EdgeKind) {
        if from == to {
            return;
        }
        for end in [from, to] {
            if !self.vertices.contains_key(end) {
                self.vertices.insert(end.to_string(), Vertex::unknown());
            }
        }
        self.edges.insert(Edge {
            from: from.to_string(),
            to: to.to_string(),
            kind,
        });
    }

    fn degrees(&self) -> BTreeMap<&str, (usize, usize)> {
        let mut d: BTreeMap<&str, (usize, usize)> =
            self.vertices.keys().map(|k| (k.as_str(), (0, 0))).collect();
        for e in &self.edges {
            if let Some(x) = d.get_mut(e.from.as_str()) {
                x.1 += 1;
            }
            if let Some(x) = d.get_mut(e.to.as_str()) {
                x.0 += 1;
            }
        }
        d
    }
}

pub fn build_graph(store: &NodeStore, analysis: &Analysis) -> DepGraph {
    let mut graph = DepGraph::default();
    for label in store.labels() {
        let nodes = merged_nodes(store, label).expect("label from store");
        let status = |n: &crate::store::Node| analysis.status(&n.name).ok();
        let with_proof: Vec<_> = nodes.iter().filter(|n| n.proof.is_some()).collect();
        graph.vertices.insert(
            label.clone(),
            Vertex {
                env: nodes[0].statement.latex_env.clone(),
                statement_ok: nodes.iter().all(|n| {
                    status(n).is_some_and(|s| s.statement.lean_ok || s.statement.mathlib_ok)
                }),
                proof_ok: (!with_proof.is_empty()).then(|| {
                    with_proof.iter().all(|n| {
                        status(n)
                            .and_then(|s| s.proof.as_ref())
                            .is_some_and(|p| p.lean_ok)
                    })
                }),
                upstream: nodes
                    .iter()
                    .any(|n| n.origin == crate::store::Origin::Upstream),
                not_ready: nodes.iter().any(|n| n.not_ready),
                known: true,
            },
        );
    }
    for label in store.labels() {
        for node in merged_nodes(store, label).expect("label from store") {
            for part in [Part::Statement, Part::Proof] {
                for used in analysis.uses(&node.name, part) {
                    graph.add_edge(used, label, part.into());
                }
            }
        }
    }
    graph
}

fn dot_id(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// DOT rendering: boxes for definitions, ellipses otherwise; green when
/// proved, blue otherwise; proof edges dashed.
pub fn emit_dot(graph: &DepGraph) -> String {
    let mut out = String::from("digraph blueprint {\n  node [style=filled];\n");
    for (label, v) in &graph.vertices {
        let shape = if v.env == "definition" {
            "box"
        } else {
            "ellipse"
        };
        let color = if v.is_proved() { "green" } else { "blue" };
        let style = if v.known {
            ""
        } else {
            ", style=\"filled,dashed\""
        };
        out.push_str(&format!(
            "  {} [shape={shape}, fillcolor=\"{color}\"{style}];\n",
            dot_id(label)
        ));
    }
    for e in &graph.edges {
        let style = match e.kind {
            EdgeKind::Statement => "solid",
            EdgeKind::Proof => "dashed",
        };
        out.push_str(&format!(
            "  {} -> {} [style={style}];\n",
            dot_id(&e.from),
            dot_id(&e.to)
        ));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonVertex<'a> {
    label: &'a str,
    #[serde(flatten)]
    vertex: &'a Vertex,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    vertices: Vec<JsonVertex<'a>>,
    edges: Vec<&'a Edge>,
}

/// `{"vertices": [{label, env, ...}], "edges": [{from, to, kind}]}`.
pub fn to_json(graph: &DepGraph) -> String {
    let doc = JsonGraph {
        vertices: graph
            .vertices
            .iter()
            .map(|(label, vertex)| JsonVertex { label, vertex })
            .collect(),
        edges: graph.edges.iter().collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LintCode {
    DanglingLabel,
    EmptyProofUses,
    EnvMismatch,
    IsolatedNode,
    MissingEdge,
    MissingMathlibok,
    StatementOnlyLeanok,
    UnreferencedNode,
    UnusedNode,
}

impl LintCode {
    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::DanglingLabel => "dangling-label",
            LintCode::EmptyProofUses => "empty-proof-uses",
            LintCode::EnvMismatch => "env-mismatch",
            LintCode::IsolatedNode => "isolated-node",
            LintCode::MissingEdge => "missing-edge",
            LintCode::MissingMathlibok => "missing-mathlibok",
            LintCode::StatementOnlyLeanok => "statement-only-leanok",
            LintCode::UnreferencedNode => "unreferenced-node",
            LintCode::UnusedNode => "unused-node",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            LintCode::DanglingLabel | LintCode::EnvMismatch => Severity::Error,
            _ => Severity::Warning,
        }
    }
}

impl fmt::Display for LintCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub code: LintCode,
    pub label: String,
    pub message: String,
}

impl Finding {
    pub fn new(code: LintCode, label: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            code,
            label: label.into(),
            message: message.into(),
        }
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity() {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}[{}] {}: {}", self.code, self.label, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintReport {
    pub findings: Vec<Finding>,
}

impl LintReport {
    pub fn new(mut findings: Vec<Finding>) -> Self {
        findings.sort();
        findings.dedup();
        LintReport { findings }
    }

    pub fn extend(&mut self, more: impl IntoIterator<Item = Finding>) {
        self.findings.extend(more);
        self.findings.sort();
        self.findings.dedup();
    }

    pub fn codes(&self) -> BTreeSet<LintCode> {
        self.findings.iter().map(|f| f.code).collect()
    }

    pub fn has_errors(&self) -> bool {
        self.findings
            .iter()
            .any(|f| f.severity() == Severity::Error)
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LintOptions {
    /// Also report unused upstream nodes.
    pub strict: bool,
}

/// Environments expected to be final results, so never "unused".
const TERMINAL_ENVS: &[&str] = &["theorem", "corollary"];

/// Lints that need only the graph: isolated, unused and dangling labels.
pub fn graph_lints(graph: &DepGraph, options: LintOptions) -> Vec<Finding> {
    let mut out = Vec::new();
    for (label, (indeg, outdeg)) in graph.degrees() {
        let v = &graph.vertices[label];
        if !v.known {
            let users: Vec<&str> = graph
                .edges
                .iter()
                .filter(|e| e.from == label)
                .map(|e| e.to.as_str())
                .collect();
            out.push(Finding::new(
                LintCode::DanglingLabel,
                label,
                format!("used by {} but no node has this label", users.join(", ")),
            ));
            continue;
        }
        if indeg == 0 && outdeg == 0 {
            out.push(Finding::new(
                LintCode::IsolatedNode,
                label,
                "no dependencies and no dependents",
            ));
        } else if outdeg == 0
            && !TERMINAL_ENVS.contains(&v.env.as_str())
            && (!v.upstream || options.strict)
        {
            out.push(Finding::new(
                LintCode::UnusedNode,
                label,
                format!("{} is not used by any other node", v.env),
            ));
        }
    }
    out
}

pub fn run_lints(
    store: &NodeStore,
    analysis: &Analysis,
    graph: &DepGraph,
    options: LintOptions,
) -> LintReport {
    let mut findings = graph_lints(graph, options);
    for label in store.labels() {
        let nodes = merged_nodes(store, label).expect("label from store");
        let envs: BTreeSet<&str> = nodes
            .iter()
            .map(|n| n.statement.latex_env.as_str())
            .collect();
        if envs.len() > 1 {
            let parts: Vec<String> = nodes
                .iter()
                .map(|n| format!("{} ({})", n.name, n.statement.latex_env))
                .collect();
            findings.push(Finding::new(
                LintCode::EnvMismatch,
                label,
                format!(
                    "merged declarations disagree on environment: {}",
                    parts.join(", ")
                ),
            ));
        }
        for node in nodes {
            let (Some(proof), Ok(status)) = (&node.proof, analysis.status(&node.name)) else {
                continue;
            };
            let Some(proof_status) = &status.proof else {
                continue;
            };
            if !proof_status.lean_ok || !analysis.uses(&node.name, Part::Proof).is_empty() {
                continue;
            }
            let excluded = |n: &crate::Name| {
                proof.excludes.contains(n)
                    || store
                        .by_name
                        .get(n)
                        .is_some_and(|x| proof.excludes_labels.contains(&x.latex_label))
            };
            if proof_status.inferred_uses.iter().all(excluded) {
                findings.push(Finding::new(
                    LintCode::EmptyProofUses,
                    label,
                    format!("the proof of {} uses no blueprint node", node.name),
                ));
            }
        }
    }
    LintReport::new(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{store, store_with, MYNAT};

    fn graph_of(src: &str) -> (NodeStore, Analysis, DepGraph) {
        let s = store(&[("M", src)]);
        let a = Analysis::run(&s).unwrap();
        let g = build_graph(&s, &a);
        (s, a, g)
    }

    fn lint(src: &str) -> LintReport {
        let (s, a, g) = graph_of(src);
        run_lints(&s, &a, &g, LintOptions::default())
    }

    #[test]
    fn appendix_edges() {
        let s = store(&[("Example", MYNAT)]);
        let a = Analysis::run(&s).unwrap();
        let g = build_graph(&s, &a);
        for from in ["MyNat.zero_add", "MyNat.succ_add"] {
            assert!(g.edges.contains(&Edge {
                from: from.into(),
                to: "MyNat.add_comm".into(),
                kind: EdgeKind::Proof,
            }));
        }
        assert!(g.vertices["MyNat.zero_add"].is_proved());
        assert!(!g.vertices["MyNat.succ_add"].is_proved());
        assert!(!g.vertices["MyNat.add_comm"].is_proved());
    }

    #[test]
    fn edges_match_effective_uses() {
        let s = store(&[("Example", MYNAT)]);
        let a = Analysis::run(&s).unwrap();
        let g = build_graph(&s, &a);
        let mut expected = BTreeSet::new();
        for node in s.by_name.values() {
            for part in [Part::Statement, Part::Proof] {
                for u in a.uses(&node.name, part) {
                    expected.insert(Edge {
                        from: u.clone(),
                        to: node.latex_label.clone(),
                        kind: part.into(),
                    });
                }
            }
        }
        assert_eq!(g.edges, expected);
    }

    #[test]
    fn single_vertex() {
        let (_, _, g) = graph_of("@[blueprint] theorem t : True := trivial");
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn dangling_label_synthesized() {
        let (s, a, g) = graph_of("@[blueprint (uses := [\"ghost\"])] def x := 1");
        assert!(!g.vertices["ghost"].known);
        let r = run_lints(&s, &a, &g, LintOptions::default());
        assert!(r.codes().contains(&LintCode::DanglingLabel));
        assert!(r.has_errors());
    }

    #[test]
    fn dot_styling() {
        let (_, _, g) =
            graph_of("@[blueprint] theorem t : True := trivial\n@[blueprint] def d := 1");
        let dot = emit_dot(&g);
        assert!(dot.contains("  \"t\" [shape=ellipse, fillcolor=\"green\"];"));
        assert!(dot.contains("  \"d\" [shape=box, fillcolor=\"green\"];"));
    }

    #[test]
    fn dot_empty_graph() {
        assert_eq!(
            emit_dot(&DepGraph::default()),
            "digraph blueprint {\n  node [style=filled];\n}\n"
        );
    }

    #[test]
    fn dot_escapes_quotes() {
        let mut g = DepGraph::default();
        g.add_edge("a\"b", "c\\d", EdgeKind::Proof);
        let dot = emit_dot(&g);
        assert!(dot.contains("\"a\\\"b\" -> \"c\\\\d\" [style=dashed];"));
    }

    #[test]
    fn isolated_node_found() {
        let r = lint("@[blueprint \"X\"] theorem x : True := trivial");
        assert!(r
            .findings
            .iter()
            .any(|f| f.code == LintCode::IsolatedNode && f.label == "X"));
    }

    #[test]
    fn chain_is_clean() {
        let r = lint(
            "@[blueprint] def a := 1\n@[blueprint (latexEnv := \"lemma\")] theorem b : a = a := by simp [a]\n@[blueprint] theorem c : True := by exact b",
        );
        assert!(r.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn unused_lemma() {
        let r = lint("@[blueprint] def a := 1\n@[blueprint (latexEnv := \"lemma\")] lemma b : a = a := by simp [a]");
        assert_eq!(r.codes(), [LintCode::UnusedNode].into_iter().collect());
    }

    #[test]
    fn proof_without_tagged_references() {
        let r = lint("@[blueprint] def a := 1\n@[blueprint] theorem t : a = a := by\n  trivial");
        assert!(r.codes().contains(&LintCode::EmptyProofUses));
    }

    #[test]
    fn unused_upstream_only_when_strict() {
        let s = store_with(
            &[(
                "M",
                "attribute [blueprint \"up\" (latexEnv := \"lemma\")] Mathlib.foo\n@[blueprint (uses := [\"up\"])] theorem t : True := trivial",
            )],
            "Mathlib.foo",
        );
        let a = Analysis::run(&s).unwrap();
        let g = build_graph(&s, &a);
        let mut lax = run_lints(&s, &a, &g, LintOptions::default());
        lax.findings.retain(|f| f.label == "up");
        assert!(lax.is_empty(), "{:?}", lax.findings);
        // upstream is a source here, so even strict mode does not flag it
        let mut g2 = g.clone();
        g2.edges.clear();
        g2.add_edge("t", "up", EdgeKind::Statement);
        let strict = graph_lints(&g2, LintOptions { strict: true });
        assert!(strict
            .iter()
            .any(|f| f.code == LintCode::UnusedNode && f.label == "up"));
        assert!(!graph_lints(&g2, LintOptions::default())
            .iter()
            .any(|f| f.label == "up"));
    }

    #[test]
    fn findings_are_sorted() {
        let r = lint("@[blueprint \"b\"] theorem b : True := trivial\n@[blueprint \"a\"] theorem a : True := trivial\n@[blueprint (uses := [\"zz\"])] def c := 1");
        let mut sorted = r.findings.clone();
        sorted.sort();
        assert_eq!(r.findings, sorted);
    }

    #[test]
    fn json_roundtrips_labels() {
        let (_, _, g) = graph_of("@[blueprint] def a := 1\n@[blueprint] theorem b : a = a := rfl");
        let v: serde_json::Value = serde_json::from_str(&to_json(&g)).unwrap();
        assert_eq!(v["vertices"].as_array().unwrap().len(), 2);
        assert_eq!(v["edges"][0]["from"], "a");
        assert_eq!(v["edges"][0]["kind"], "statement");
    }
}
