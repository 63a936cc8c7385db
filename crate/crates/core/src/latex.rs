//! LaTeX fragments for nodes and modules, and the macro header that maps
//! `\inputleannode{label}` and `\inputleanmodule{Module}` to fragment files.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::infer::Analysis;
use crate::name::Name;
use crate::store::{merged_nodes, ModuleEntry, Node, NodeStore, Part};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderOptions {
    /// Emit `\leanok` next to `\mathlibok` on upstream statements.
    pub emit_leanok_with_mathlibok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedNode {
    pub label: String,
    pub lean_names: Vec<Name>,
    pub latex_env: String,
    pub statement_block: String,
    pub proof_block: Option<String>,
}

impl RenderedNode {
    /// The fragment file contents.
    pub fn to_tex(&self) -> String {
        let mut out = self.statement_block.clone();
        if let Some(proof) = &self.proof_block {
            out.push_str("\n\n");
            out.push_str(proof);
        }
        out.push('\n');
        out
    }
}

fn push_indented(out: &mut String, text: &str) {
    for line in text.lines() {
        if line.trim().is_empty() {
            out.push('\n');
        } else {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
    }
}

fn push_markers(out: &mut String, markers: &[String]) {
    if !markers.is_empty() {
        out.push_str("  ");
        out.push_str(&markers.join(" "));
        out.push('\n');
    }
}

fn merged_text<'a>(texts: impl Iterator<Item = &'a str>) -> String {
    let distinct: IndexSet<&str> = texts.map(str::trim).filter(|t| !t.is_empty()).collect();
    distinct.into_iter().collect::<Vec<_>>().join("\n\n")
}

fn merged_uses<'a>(lists: impl Iterator<Item = &'a [String]>) -> Vec<String> {
    let set: IndexSet<&String> = lists.flatten().collect();
    set.into_iter().cloned().collect()
}

fn format_title(title: &str) -> String {
    if title.contains(']') {
        format!("[{{{title}}}]")
    } else {
        format!("[{title}]")
    }
}

pub fn render_node(
    store: &NodeStore,
    analysis: &Analysis,
    label: &str,
    options: RenderOptions,
) -> Result<RenderedNode> {
    let nodes = merged_nodes(store, label)?;
    let env = nodes[0].statement.latex_env.clone();
    if nodes.iter().any(|n| n.statement.latex_env != env) {
        return Err(Error::EnvMismatch {
            label: label.to_string(),
            nodes: nodes
                .iter()
                .map(|n| (n.name.clone(), n.statement.latex_env.clone()))
                .collect(),
        });
    }
    let mut statuses = Vec::with_capacity(nodes.len());
    for n in &nodes {
        statuses.push(analysis.status(&n.name)?);
    }

    let mut block = format!("\\begin{{{env}}}");
    if let Some(title) = nodes.iter().find_map(|n| n.title.as_deref()) {
        block.push_str(&format_title(title));
    }
    block.push('\n');
    let names: Vec<String> = nodes.iter().map(|n| n.name.to_string()).collect();
    block.push_str(&format!(
        "  \\label{{{label}}} \\lean{{{}}}\n",
        names.join(", ")
    ));

    let mut markers = Vec::new();
    let mathlib = statuses.iter().any(|s| s.statement.mathlib_ok);
    let lean_ok = statuses.iter().all(|s| s.statement.lean_ok);
    if mathlib {
        markers.push("\\mathlibok".to_string());
    }
    if lean_ok && (!mathlib || options.emit_leanok_with_mathlibok) {
        markers.push("\\leanok".to_string());
    }
    let uses = merged_uses(
        nodes
            .iter()
            .map(|n| analysis.uses(&n.name, Part::Statement)),
    );
    if !uses.is_empty() {
        markers.push(format!("\\uses{{{}}}", uses.join(", ")));
    }
    if nodes.iter().any(|n| n.not_ready) {
        markers.push("\\notready".to_string());
    }
    if let Some(d) = nodes.iter().find_map(|n| n.discussion) {
        markers.push(format!("\\discussion{{{d}}}"));
    }
    push_markers(&mut block, &markers);
    push_indented(
        &mut block,
        &merged_text(nodes.iter().map(|n| n.statement.text.as_str())),
    );
    block.push_str(&format!("\\end{{{env}}}"));

    let with_proof: Vec<(&&Node, _)> = nodes
        .iter()
        .zip(&statuses)
        .filter(|(n, _)| n.proof.is_some())
        .collect();
    let proof_block = if with_proof.is_empty() {
        None
    } else {
        let mut p = String::from("\\begin{proof}\n");
        let mut markers = Vec::new();
        if with_proof
            .iter()
            .all(|(_, s)| s.proof.as_ref().is_some_and(|p| p.lean_ok))
        {
            markers.push("\\leanok".to_string());
        }
        let uses = merged_uses(
            with_proof
                .iter()
                .map(|(n, _)| analysis.uses(&n.name, Part::Proof)),
        );
        if !uses.is_empty() {
            markers.push(format!("\\uses{{{}}}", uses.join(", ")));
        }
        push_markers(&mut p, &markers);
        push_indented(
            &mut p,
            &merged_text(
                with_proof
                    .iter()
                    .filter_map(|(n, _)| n.proof.as_ref().map(|p| p.text.as_str())),
            ),
        );
        p.push_str("\\end{proof}");
        Some(p)
    };

    Ok(RenderedNode {
        label: label.to_string(),
        lean_names: nodes.iter().map(|n| n.name.clone()).collect(),
        latex_env: env,
        statement_block: block,
        proof_block,
    })
}

/// The module where a label is rendered: that of its first merged node.
pub fn home_module<'a>(store: &'a NodeStore, label: &str) -> Result<&'a Name> {
    Ok(&merged_nodes(store, label)?[0].module)
}

/// Raw comments and nodes of `module` in source order, separated by blank
/// lines. Labels rendered in another module leave a comment line instead.
pub fn render_module(
    store: &NodeStore,
    analysis: &Analysis,
    module: &Name,
    options: RenderOptions,
) -> Result<String> {
    let Some(entries) = store.module_order.get(module) else {
        return Ok(String::new());
    };
    let mut chunks = Vec::new();
    let mut seen = BTreeSet::new();
    for entry in entries {
        match entry {
            ModuleEntry::Comment(text) => chunks.push(text.trim_end().to_string()),
            ModuleEntry::Node(name) => {
                let label = &store.node(name)?.latex_label;
                if !seen.insert(label.clone()) {
                    continue;
                }
                let home = home_module(store, label)?;
                if home == module {
                    chunks.push(
                        render_node(store, analysis, label, options)?
                            .to_tex()
                            .trim_end()
                            .to_string(),
                    );
                } else {
                    chunks.push(format!("% node {label} rendered in module {home}"));
                }
            }
        }
    }
    if chunks.is_empty() {
        return Ok(String::new());
    }
    let mut out = chunks.join("\n\n");
    out.push('\n');
    Ok(out)
}

/// Output-relative paths of every fragment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FragmentSet {
    pub node_fragments: BTreeMap<String, String>,
    pub module_fragments: BTreeMap<Name, String>,
    pub macro_header: String,
}

impl FragmentSet {
    /// Assigns paths for all labels and modules of `store`.
    pub fn plan(store: &NodeStore) -> FragmentSet {
        FragmentSet {
            node_fragments: node_paths(store.labels().map(String::as_str)),
            module_fragments: store
                .module_order
                .keys()
                .map(|m| (m.clone(), format!("modules/{m}.tex")))
                .collect(),
            macro_header: "macros.tex".to_string(),
        }
    }

    pub fn all_paths(&self) -> impl Iterator<Item = &str> {
        self.node_fragments
            .values()
            .chain(self.module_fragments.values())
            .map(String::as_str)
            .chain(std::iter::once(self.macro_header.as_str()))
    }
}

/// Replaces every character outside `[A-Za-z0-9_-]` with `_`.
pub fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn label_hash(label: &str) -> String {
    let digest = Sha256::digest(label.as_bytes());
    digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

/// File names for labels, in sorted label order. A label whose sanitized name
/// is taken (compared case-insensitively, for case-folding file systems) gets
/// an 8-hex-digit hash suffix.
pub fn node_paths<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, String> {
    let sorted: BTreeSet<&str> = labels.into_iter().collect();
    let mut taken = BTreeSet::new();
    let mut out = BTreeMap::new();
    for label in sorted {
        let base = sanitize_label(label);
        let mut stem = base.clone();
        let mut attempt = 0;
        while !taken.insert(stem.to_lowercase()) {
            attempt += 1;
            stem = if attempt == 1 {
                format!("{base}_{}", label_hash(label))
            } else {
                format!("{base}_{}_{attempt}", label_hash(label))
            };
        }
        out.insert(label.to_string(), format!("nodes/{stem}.tex"));
    }
    out
}

/// The macro header. `\archforgeroot` (empty by default) is prepended to
/// fragment paths so documents can live outside the output directory.
pub fn render_macros(fragments: &FragmentSet) -> String {
    let mut out = String::from(
        "% Generated by archforge; do not edit.\n\
         \\makeatletter\n\
         \\providecommand{\\archforgeroot}{}\n\
         \\newcommand{\\inputleannode}[1]{%\n  \
         \\@ifundefined{archforge@node@#1}%\n    \
         {\\PackageError{archforge}{Unknown blueprint node `#1'}{Rerun archforge extract or fix the label.}}%\n    \
         {\\input{\\archforgeroot\\csname archforge@node@#1\\endcsname}}}\n\
         \\newcommand{\\inputleanmodule}[1]{%\n  \
         \\@ifundefined{archforge@module@#1}%\n    \
         {\\PackageError{archforge}{Unknown blueprint module `#1'}{Rerun archforge extract or fix the module name.}}%\n    \
         {\\input{\\archforgeroot\\csname archforge@module@#1\\endcsname}}}\n",
    );
    for (label, path) in &fragments.node_fragments {
        out.push_str(&format!("\\@namedef{{archforge@node@{label}}}{{{path}}}\n"));
    }
    for (module, path) in &fragments.module_fragments {
        out.push_str(&format!(
            "\\@namedef{{archforge@module@{module}}}{{{path}}}\n"
        ));
    }
    out.push_str("\\makeatother\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{n, store, store_with, ADD_COMM, MYNAT};

    fn tokens(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn render(s: &NodeStore, label: &str) -> RenderedNode {
        let a = Analysis::run(s).unwrap();
        render_node(s, &a, label, RenderOptions::default()).unwrap()
    }

    #[test]
    fn add_comm_matches_listing() {
        let s = store(&[("AddComm", ADD_COMM)]);
        let tex = render(&s, "thm:add-comm").to_tex();
        let expected = r"\begin{theorem}
  \label{thm:add-comm} \lean{MyNat.add_comm}
  \leanok \uses{def:nat}
  Addition in $ℕ$ is commutative.
\end{theorem}

\begin{proof}
  \uses{lem:zero-add, lem:succ-add}
  By induction and then
  \cref{lem:zero-add, lem:succ-add}.
\end{proof}";
        assert_eq!(tokens(&tex), tokens(expected));
        assert!(!tex.contains("sorryAx"));
    }

    #[test]
    fn minimal_node() {
        let s = store(&[("M", "@[blueprint (statement := /-- Hi. -/)] def x := 1")]);
        let r = render(&s, "x");
        assert_eq!(
            r.statement_block,
            "\\begin{definition}\n  \\label{x} \\lean{x}\n  \\leanok\n  Hi.\n\\end{definition}"
        );
        assert!(r.proof_block.is_none());
    }

    #[test]
    fn merged_names_listed_together() {
        let s = store(&[(
            "M",
            "@[blueprint \"my-label\"] theorem mul_theorem : True := trivial\n@[blueprint \"my-label\"] theorem add_theorem : True := trivial",
        )]);
        let r = render(&s, "my-label");
        assert!(r
            .statement_block
            .contains("\\lean{mul_theorem, add_theorem}"));
        assert_eq!(r.lean_names, vec![n("mul_theorem"), n("add_theorem")]);
    }

    #[test]
    fn env_mismatch_is_error() {
        let s = store(&[(
            "M",
            "@[blueprint \"L\"] theorem a : True := trivial\n@[blueprint \"L\"] def b := 1",
        )]);
        let a = Analysis::run(&s).unwrap();
        assert!(matches!(
            render_node(&s, &a, "L", RenderOptions::default()),
            Err(Error::EnvMismatch { .. })
        ));
    }

    #[test]
    fn metadata_markers() {
        let s = store(&[(
            "M",
            "@[blueprint (title := /-- Main -/) (notReady := true) (discussion := 7)] theorem t : True := sorry",
        )]);
        let r = render(&s, "t");
        assert!(r.statement_block.starts_with("\\begin{theorem}[Main]\n"));
        assert!(r
            .statement_block
            .contains("  \\leanok \\notready \\discussion{7}\n"));
        let proof = r.proof_block.unwrap();
        assert!(!proof.contains("\\leanok"));
    }

    #[test]
    fn upstream_gets_mathlibok_only() {
        let s = store_with(
            &[("M", "attribute [blueprint \"le\"] Mathlib.le_refl")],
            "Mathlib.le_refl",
        );
        let a = Analysis::run(&s).unwrap();
        let r = render_node(&s, &a, "le", RenderOptions::default()).unwrap();
        assert!(r.statement_block.contains("\\mathlibok"));
        assert!(!r.statement_block.contains("\\leanok"));
        let r = render_node(
            &s,
            &a,
            "le",
            RenderOptions {
                emit_leanok_with_mathlibok: true,
            },
        )
        .unwrap();
        assert!(r.statement_block.contains("\\mathlibok \\leanok"));
    }

    #[test]
    fn appendix_module_order() {
        let s = store(&[("Example", MYNAT)]);
        let a = Analysis::run(&s).unwrap();
        let tex = render_module(&s, &a, &n("Example"), RenderOptions::default()).unwrap();
        let positions: Vec<usize> = [
            "{MyNat}",
            "{def:nat-add}",
            "{MyNat.zero_add}",
            "{MyNat.succ_add}",
            "{MyNat.add_comm}",
        ]
        .iter()
        .map(|l| tex.find(&format!("\\label{l}")).unwrap())
        .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn untagged_module_is_empty() {
        let s = store(&[("M", "def x := 1")]);
        let a = Analysis::run(&s).unwrap();
        assert_eq!(
            render_module(&s, &a, &n("M"), RenderOptions::default()).unwrap(),
            ""
        );
    }

    #[test]
    fn comment_precedes_node() {
        let s = store(&[(
            "M",
            "blueprint_comment /-- \\section{Intro} -/\n@[blueprint] def x := 1",
        )]);
        let a = Analysis::run(&s).unwrap();
        let tex = render_module(&s, &a, &n("M"), RenderOptions::default()).unwrap();
        assert!(tex.starts_with("\\section{Intro}\n\n\\begin{definition}"));
    }

    #[test]
    fn cross_module_label_renders_once() {
        let s = store(&[
            ("A", "@[blueprint \"L\"] theorem a : True := trivial"),
            (
                "B",
                "import A\n@[blueprint \"L\"] theorem b : True := trivial",
            ),
        ]);
        let a = Analysis::run(&s).unwrap();
        let ta = render_module(&s, &a, &n("A"), RenderOptions::default()).unwrap();
        let tb = render_module(&s, &a, &n("B"), RenderOptions::default()).unwrap();
        assert!(ta.contains("\\lean{a, b}"));
        assert_eq!(tb, "% node L rendered in module A\n");
    }

    #[test]
    fn macro_table_for_add_comm() {
        let s = store(&[("AddComm", ADD_COMM)]);
        let f = FragmentSet::plan(&s);
        assert_eq!(f.node_fragments["thm:add-comm"], "nodes/thm_add-comm.tex");
        let m = render_macros(&f);
        assert!(m.contains("\\@namedef{archforge@node@thm:add-comm}{nodes/thm_add-comm.tex}"));
        assert!(m.contains("\\@namedef{archforge@module@AddComm}{modules/AddComm.tex}"));
    }

    #[test]
    fn empty_macro_header_still_defines_macros() {
        let m = render_macros(&FragmentSet::plan(&store(&[])));
        assert!(m.contains("\\newcommand{\\inputleannode}"));
        assert!(m.contains("\\newcommand{\\inputleanmodule}"));
        assert!(m.contains("\\PackageError"));
    }

    #[test]
    fn colliding_labels_get_distinct_files() {
        let paths = node_paths(["a:b", "a_b"]);
        assert_eq!(paths["a:b"], "nodes/a_b.tex");
        let second = &paths["a_b"];
        assert_ne!(second, &paths["a:b"]);
        let stem = second
            .strip_prefix("nodes/a_b_")
            .unwrap()
            .strip_suffix(".tex")
            .unwrap();
        assert_eq!(stem.len(), 8);
        assert!(stem.chars().all(|c| c.is_ascii_hexdigit()));
    }

    #[test]
    fn case_folding_collision() {
        let paths = node_paths(["Foo", "foo"]);
        assert_ne!(paths["Foo"].to_lowercase(), paths["foo"].to_lowercase());
    }
}
