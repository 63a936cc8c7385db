//! Planning a conversion: which attributes go where in the Lean sources and
//! which LaTeX environments become `\inputleannode`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::tex::{LegacyDocument, LegacyNode};
use crate::error::{Error, Result};
use crate::name::Name;
use crate::source::{parse_module_str, Declaration, ModuleUnit};
use crate::store::{build_store, NodeStore, StoreOptions, UpstreamIndex};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvertOptions {
    /// Skip legacy nodes without `\lean`.
    pub only_lean_nodes: bool,
    /// Leave `\uses` of `\leanok` parts to inference.
    pub drop_uses_when_lean_ok: bool,
    /// Target line width of generated docstrings.
    pub docstring_width: usize,
    /// Module receiving upstream attributions nothing depends on; defaults
    /// to the last module in import order.
    pub root_module: Option<Name>,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        ConvertOptions {
            only_lean_nodes: true,
            drop_uses_when_lean_ok: true,
            docstring_width: 100,
            root_module: None,
        }
    }
}

/// A Lean source file with its text and parse.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
    pub unit: ModuleUnit,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: String, module: Name) -> Result<Self> {
        let unit = parse_module_str(&text, module)?;
        Ok(SourceFile {
            path: path.into(),
            text,
            unit,
        })
    }

    pub fn load(path: &Path, module: Name) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(path, text, module)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceEdit {
    pub file: PathBuf,
    pub insert_at: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LatexEdit {
    pub file: PathBuf,
    pub replace_span: (usize, usize),
    pub replacement: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedNode {
    pub file: PathBuf,
    pub line: usize,
    pub label: Option<String>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConversionPlan {
    /// Sorted by file then offset.
    pub source_edits: Vec<SourceEdit>,
    pub latex_edits: Vec<LatexEdit>,
    pub skipped: Vec<SkippedNode>,
    /// Content hash of every file an edit touches, as seen while planning.
    pub file_hashes: BTreeMap<PathBuf, u64>,
}

impl ConversionPlan {
    pub fn is_empty(&self) -> bool {
        self.source_edits.is_empty() && self.latex_edits.is_empty()
    }
}

#[derive(Clone, Debug)]
enum Target {
    Project(Name),
    Upstream(Name),
}

impl Target {
    fn name(&self) -> &Name {
        match self {
            Target::Project(n) | Target::Upstream(n) => n,
        }
    }
}

fn lean_string(s: &str) -> String {
    let mut out = String::from("\"");
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

/// Greedy word wrap per paragraph. Paragraphs containing `%` keep their
/// line breaks, since a LaTeX comment would swallow joined text.
pub fn reflow(text: &str, width: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (k, para) in text.split("\n\n").enumerate() {
        if k > 0 {
            out.push(String::new());
        }
        if para.contains('%') {
            out.extend(para.lines().map(str::to_string));
            continue;
        }
        let mut line = String::new();
        for word in para.split_whitespace() {
            if !line.is_empty() && line.len() + 1 + word.len() > width {
                out.push(std::mem::take(&mut line));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(word);
        }
        if !line.is_empty() {
            out.push(line);
        }
    }
    out
}

fn docstring(text: &str, width: usize) -> String {
    let mut body = String::new();
    for (i, line) in reflow(text, width).iter().enumerate() {
        if i > 0 {
            body.push('\n');
            if !line.is_empty() {
                body.push_str("    ");
            }
        }
        body.push_str(line);
    }
    format!("/-- {body} -/")
}

fn label_list(labels: &[String]) -> String {
    let items: Vec<String> = labels.iter().map(|l| lean_string(l)).collect();
    format!("[{}]", items.join(", "))
}

struct Defaults {
    env: &'static str,
    has_proof: bool,
}

/// `blueprint "label" (option := …) …`, one option per line.
fn attribute_body(
    label: &str,
    node: &LegacyNode,
    defaults: Defaults,
    options: &ConvertOptions,
) -> String {
    let mut opts = Vec::new();
    let width = options.docstring_width;
    if !node.statement_text.is_empty() {
        opts.push(format!(
            "(statement := {})",
            docstring(&node.statement_text, width)
        ));
    }
    if let Some(title) = &node.title {
        opts.push(format!("(title := {})", docstring(title, width)));
    }
    if node.env != defaults.env {
        opts.push(format!("(latexEnv := {})", lean_string(&node.env)));
    }
    if node.proof.is_some() != defaults.has_proof {
        opts.push(format!("(hasProof := {})", node.proof.is_some()));
    }
    let keep = |lean_ok: bool| !(lean_ok && options.drop_uses_when_lean_ok);
    if !node.statement_uses.is_empty() && keep(node.statement_lean_ok) {
        opts.push(format!("(uses := {})", label_list(&node.statement_uses)));
    }
    if let Some(proof) = &node.proof {
        if !proof.text.is_empty() {
            opts.push(format!("(proof := {})", docstring(&proof.text, width)));
        }
        if !proof.uses.is_empty() && keep(proof.lean_ok) {
            opts.push(format!("(proofUses := {})", label_list(&proof.uses)));
        }
    }
    if node.not_ready {
        opts.push("(notReady := true)".to_string());
    }
    if let Some(d) = node.discussion {
        opts.push(format!("(discussion := {d})"));
    }
    let mut out = format!("blueprint {}", lean_string(label));
    for o in opts {
        out.push_str("\n  ");
        out.push_str(&o);
    }
    out
}

/// Whitespace between the start of the line and `offset`, if only
/// whitespace precedes it.
fn line_indent(text: &str, offset: usize) -> Option<&str> {
    let line_start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let prefix = &text[line_start..offset];
    prefix
        .chars()
        .all(|c| c == ' ' || c == '\t')
        .then_some(prefix)
}

fn unsafe_in_docstring(text: &str) -> bool {
    text.contains("-/") || text.contains("/-")
}

struct Planned<'a> {
    node: &'a LegacyNode,
    label: String,
    targets: Vec<Target>,
}

fn skip(node: &LegacyNode, reason: impl Into<String>) -> SkippedNode {
    SkippedNode {
        file: node.span.file.clone(),
        line: node.span.line,
        label: node.label.clone(),
        reason: reason.into(),
    }
}

fn resolve_targets(
    node: &LegacyNode,
    store: &NodeStore,
    upstream: &UpstreamIndex,
    options: &ConvertOptions,
) -> std::result::Result<Vec<Target>, String> {
    let mut names = node.lean_names.clone();
    if names.is_empty() {
        if options.only_lean_nodes {
            return Err("no `\\lean` declaration".into());
        }
        match node.label.as_ref().and_then(|l| l.parse::<Name>().ok()) {
            Some(n) if store.decls.contains_key(&n) => names.push(n),
            _ => return Err("no `\\lean` declaration and the label names none".into()),
        }
    }
    let mut targets = Vec::new();
    for name in names {
        if let Some(entry) = store.decls.get(&name) {
            if entry.decl.attribute.is_some() || store.is_tagged(&name) {
                return Err(format!("`{name}` already has a blueprint attribute"));
            }
            targets.push(Target::Project(name));
        } else if upstream.contains(&name) {
            if store.is_tagged(&name) {
                return Err(format!("`{name}` already has a blueprint attribute"));
            }
            targets.push(Target::Upstream(name));
        } else {
            return Err(format!(
                "`{name}` matches no declaration or upstream index entry"
            ));
        }
    }
    let texts = [
        Some(&node.statement_text),
        node.proof.as_ref().map(|p| &p.text),
        node.title.as_ref(),
    ];
    if texts.into_iter().flatten().any(|t| unsafe_in_docstring(t)) {
        return Err("text contains a comment delimiter that cannot go in a docstring".into());
    }
    Ok(targets)
}

pub fn plan_conversion(
    docs: &[LegacyDocument],
    sources: &[SourceFile],
    upstream: &UpstreamIndex,
    options: &ConvertOptions,
) -> Result<ConversionPlan> {
    let units: Vec<ModuleUnit> = sources.iter().map(|s| s.unit.clone()).collect();
    let store = build_store(&units, upstream, &StoreOptions::default())?;
    let file_of: BTreeMap<&Name, &SourceFile> = sources.iter().map(|s| (&s.unit.name, s)).collect();

    let mut plan = ConversionPlan::default();
    let mut planned: Vec<Planned> = Vec::new();
    let mut claims: BTreeMap<Name, String> = BTreeMap::new();
    for doc in docs {
        for node in &doc.nodes {
            let targets = match resolve_targets(node, &store, upstream, options) {
                Ok(t) => t,
                Err(reason) => {
                    plan.skipped.push(skip(node, reason));
                    continue;
                }
            };
            let label = node
                .label
                .clone()
                .unwrap_or_else(|| targets[0].name().to_string());
            for t in &targets {
                if let Some(first) = claims.insert(t.name().clone(), label.clone()) {
                    return Err(Error::DoubleClaim {
                        decl: t.name().clone(),
                        first,
                        second: label,
                    });
                }
            }
            plan.file_hashes.insert(doc.path.clone(), doc.source_hash);
            planned.push(Planned {
                node,
                label,
                targets,
            });
        }
    }

    let decl = |name: &Name| -> (&Declaration, &SourceFile, (usize, usize)) {
        let entry = &store.decls[name];
        (
            &entry.decl,
            file_of[&entry.module],
            (store.topo_index(&entry.module), entry.seq),
        )
    };

    // Project declarations carrying the primary attribute, by label.
    let mut anchors: BTreeMap<&str, (usize, usize, &Name)> = BTreeMap::new();
    let mut commands: Vec<(&Planned, &Name, String)> = Vec::new();
    for p in &planned {
        let primary = p
            .targets
            .iter()
            .position(|t| matches!(t, Target::Project(_)))
            .unwrap_or(0);
        for (i, target) in p.targets.iter().enumerate() {
            let body = if i == primary {
                let defaults = match target {
                    Target::Project(n) => {
                        let kind = decl(n).0.kind;
                        Defaults {
                            env: if kind.is_theorem() {
                                "theorem"
                            } else {
                                "definition"
                            },
                            has_proof: kind.is_theorem(),
                        }
                    }
                    Target::Upstream(_) => Defaults {
                        env: "theorem",
                        has_proof: false,
                    },
                };
                attribute_body(&p.label, p.node, defaults, options)
            } else {
                format!("blueprint {}", lean_string(&p.label))
            };
            match target {
                Target::Project(name) => {
                    let (d, file, pos) = decl(name);
                    if i == primary {
                        anchors.insert(&p.label, (pos.0, pos.1, name));
                    }
                    let edit = match d.layout.attr_list_close {
                        Some(close) => SourceEdit {
                            file: file.path.clone(),
                            insert_at: close,
                            text: format!(", {body}"),
                        },
                        None => {
                            let at = d.layout.keyword_start;
                            let text = match line_indent(&file.text, at) {
                                Some(indent) => format!("@[{body}]\n{indent}"),
                                None => format!("@[{body}] "),
                            };
                            SourceEdit {
                                file: file.path.clone(),
                                insert_at: at,
                                text,
                            }
                        }
                    };
                    plan.file_hashes
                        .insert(file.path.clone(), file.unit.source_hash);
                    plan.source_edits.push(edit);
                }
                Target::Upstream(name) => commands.push((p, name, body)),
            }
        }
    }

    let mut command_edits = Vec::new();
    for (p, name, body) in commands {
        let command = format!("attribute [{body}] {name}");
        let dependents = planned
            .iter()
            .filter(|q| q.node.all_uses().contains(&p.label.as_str()))
            .filter_map(|q| anchors.get(q.label.as_str()))
            .min();
        let edit = match dependents {
            Some(&(_, _, anchor)) => {
                let (d, file, _) = decl(anchor);
                let at = d.span.byte_start;
                let indent = line_indent(&file.text, at).unwrap_or("");
                SourceEdit {
                    file: file.path.clone(),
                    insert_at: at,
                    text: format!("{command}\n\n{indent}"),
                }
            }
            None => {
                let root = options
                    .root_module
                    .clone()
                    .or_else(|| store.topo_order.last().cloned())
                    .ok_or_else(|| {
                        Error::Config("no Lean module to receive upstream attributions".into())
                    })?;
                let file = file_of.get(&root).ok_or_else(|| {
                    Error::Config(format!("root module `{root}` is not a project module"))
                })?;
                let sep = if file.text.is_empty() {
                    ""
                } else if file.text.ends_with('\n') {
                    "\n"
                } else {
                    "\n\n"
                };
                SourceEdit {
                    file: file.path.clone(),
                    insert_at: file.text.len(),
                    text: format!("{sep}{command}\n"),
                }
            }
        };
        let file = sources
            .iter()
            .find(|s| s.path == edit.file)
            .expect("edit targets a source file");
        plan.file_hashes
            .insert(file.path.clone(), file.unit.source_hash);
        command_edits.push(edit);
    }
    // An attribution sharing an offset with a new `@[…]` must precede it,
    // or it would separate that attribute from its declaration.
    plan.source_edits.splice(0..0, command_edits);

    for p in &planned {
        plan.latex_edits.push(LatexEdit {
            file: p.node.span.file.clone(),
            replace_span: (p.node.span.byte_start, p.node.span.byte_end),
            replacement: format!("\\inputleannode{{{}}}", p.label),
        });
    }
    // Stable sorts keep generation order among edits at one offset.
    plan.source_edits
        .sort_by(|a, b| (&a.file, a.insert_at).cmp(&(&b.file, b.insert_at)));
    plan.latex_edits
        .sort_by(|a, b| (&a.file, a.replace_span).cmp(&(&b.file, b.replace_span)));
    Ok(plan)
}
