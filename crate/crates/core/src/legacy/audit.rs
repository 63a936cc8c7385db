//! Comparing a hand-written blueprint with what the sources imply.

use std::collections::BTreeSet;

use super::tex::LegacyNode;
use crate::graph::{
    graph_lints, DepGraph, EdgeKind, Finding, LintCode, LintOptions, LintReport, Vertex,
};
use crate::infer::Analysis;
use crate::store::{merged_nodes, NodeStore, Part};

/// The graph a legacy blueprint declares through its own `\uses`.
pub fn legacy_graph(nodes: &[LegacyNode]) -> DepGraph {
    let mut g = DepGraph::default();
    for n in nodes {
        let Some(label) = &n.label else { continue };
        g.vertices.insert(
            label.clone(),
            Vertex {
                env: n.env.clone(),
                statement_ok: n.statement_lean_ok || n.mathlib_ok,
                proof_ok: n.proof.as_ref().map(|p| p.lean_ok),
                upstream: n.mathlib_ok,
                not_ready: n.not_ready,
                known: true,
            },
        );
    }
    for n in nodes {
        let Some(label) = &n.label else { continue };
        for u in &n.statement_uses {
            g.add_edge(u, label, EdgeKind::Statement);
        }
        for u in n.proof.iter().flat_map(|p| &p.uses) {
            g.add_edge(u, label, EdgeKind::Proof);
        }
    }
    g
}

/// Graph lints on the legacy graph, plus discrepancies against the store:
/// dependencies the blueprint omits, upstream statements without
/// `\mathlibok`, and proofs formalized in Lean but only the statement
/// marked `\leanok`.
pub fn audit_legacy(
    nodes: &[LegacyNode],
    store: &NodeStore,
    analysis: &Analysis,
    options: LintOptions,
) -> LintReport {
    let mut findings = graph_lints(&legacy_graph(nodes), options);
    for n in nodes {
        let Some(label) = &n.label else { continue };
        let Ok(merged) = merged_nodes(store, label) else {
            continue;
        };
        let declared: BTreeSet<&str> = n.all_uses().into_iter().collect();
        let mut missing = BTreeSet::new();
        for node in &merged {
            for part in [Part::Statement, Part::Proof] {
                for u in analysis.uses(&node.name, part) {
                    if !declared.contains(u.as_str()) {
                        missing.insert(u.clone());
                    }
                }
            }
        }
        if !missing.is_empty() {
            let list: Vec<_> = missing.into_iter().collect();
            findings.push(Finding::new(
                LintCode::MissingEdge,
                label,
                format!(
                    "the sources use {} but the blueprint does not say so",
                    list.join(", ")
                ),
            ));
        }
        let statuses: Vec<_> = merged
            .iter()
            .filter_map(|m| analysis.status(&m.name).ok())
            .collect();
        if !n.mathlib_ok && statuses.iter().any(|s| s.statement.mathlib_ok) {
            findings.push(Finding::new(
                LintCode::MissingMathlibok,
                label,
                "the declaration is upstream but the statement lacks \\mathlibok",
            ));
        }
        let proof_ok = statuses
            .iter()
            .filter_map(|s| s.proof.as_ref())
            .map(|p| p.lean_ok)
            .reduce(|a, b| a && b);
        if n.statement_lean_ok
            && proof_ok == Some(true)
            && n.proof.as_ref().is_some_and(|p| !p.lean_ok)
        {
            findings.push(Finding::new(
                LintCode::StatementOnlyLeanok,
                label,
                "the proof is formalized but only the statement carries \\leanok",
            ));
        }
    }
    LintReport::new(findings)
}
