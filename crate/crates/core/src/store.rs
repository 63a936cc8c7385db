//! The blueprint node environment: one node per tagged declaration plus a
//! label index that merges several declarations into one blueprint entry.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::Resolver;
use crate::name::{Name, NameOrLabel};
use crate::source::{AttributeSpec, DeclKind, Declaration, ModuleItem, ModuleUnit, Scope};

pub const DEFAULT_UPSTREAM_PREFIXES: [&str; 4] = ["Init", "Std", "Batteries", "Mathlib"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Project,
    Upstream,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Statement,
    Proof,
}

/// The statement or proof half of a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodePart {
    pub text: String,
    /// Explicitly specified dependencies, resolved where possible.
    pub uses: Vec<Name>,
    pub excludes: Vec<Name>,
    pub uses_labels: Vec<String>,
    pub excludes_labels: Vec<String>,
    pub latex_env: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Node {
    pub name: Name,
    pub latex_label: String,
    pub statement: NodePart,
    pub proof: Option<NodePart>,
    pub not_ready: bool,
    pub discussion: Option<u64>,
    pub title: Option<String>,
    pub origin: Origin,
    /// Module whose source tags this node.
    pub module: Name,
    /// Item index within `module`.
    pub seq: usize,
    /// Defining module of an upstream declaration, when known.
    pub upstream_module: Option<Name>,
    /// Declaration kind for project nodes.
    pub kind: Option<DeclKind>,
    /// Whether the tag came from an `attribute [blueprint]` command.
    pub via_command: bool,
}

impl Node {
    pub fn part(&self, part: Part) -> Option<&NodePart> {
        match part {
            Part::Statement => Some(&self.statement),
            Part::Proof => self.proof.as_ref(),
        }
    }
}

/// A parsed project declaration together with its position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclEntry {
    pub decl: Declaration,
    pub module: Name,
    pub seq: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ModuleEntry {
    Comment(String),
    Node(Name),
}

/// Known external declarations, keyed by name, with their defining module
/// when the index records it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpstreamIndex {
    entries: BTreeMap<Name, Option<Name>>,
}

impl UpstreamIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the index format: one fully qualified name per line, optionally
    /// followed by whitespace and the defining module; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut index = UpstreamIndex::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse = |s: &str| {
                s.parse::<Name>().map_err(|_| Error::Parse {
                    module: "upstream index".into(),
                    line: i + 1,
                    message: format!("malformed name `{s}`"),
                })
            };
            let name = parse(fields.next().expect("nonempty line"))?;
            let module = fields.next().map(parse).transpose()?;
            if let Some(extra) = fields.next() {
                return Err(Error::Parse {
                    module: "upstream index".into(),
                    line: i + 1,
                    message: format!("unexpected `{extra}`"),
                });
            }
            index.insert(name, module);
        }
        Ok(index)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, name: Name, module: Option<Name>) {
        self.entries.insert(name, module);
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    /// The defining module: recorded, or else guessed as the name's prefix.
    pub fn module_of(&self, name: &Name) -> Option<Name> {
        match self.entries.get(name)? {
            Some(m) => Some(m.clone()),
            None => name.parent(),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoreOptions {
    pub upstream_prefixes: Vec<String>,
}

impl Default for StoreOptions {
    fn default() -> Self {
        StoreOptions {
            upstream_prefixes: DEFAULT_UPSTREAM_PREFIXES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeStore {
    pub by_name: BTreeMap<Name, Node>,
    /// Label to node names, ordered by (module topological index, seq).
    pub by_label: BTreeMap<String, Vec<Name>>,
    pub module_order: BTreeMap<Name, Vec<ModuleEntry>>,
    /// Imports between project modules only.
    pub import_graph: BTreeMap<Name, Vec<Name>>,
    /// Project modules in topological order (imports first).
    pub topo_order: Vec<Name>,
    pub decls: BTreeMap<Name, DeclEntry>,
    pub upstream: UpstreamIndex,
    pub options: StoreOptions,
    /// Transitive project imports of each module.
    #[serde(skip)]
    import_closure: BTreeMap<Name, BTreeSet<Name>>,
}

impl NodeStore {
    pub fn node(&self, name: &Name) -> Result<&Node> {
        self.by_name
            .get(name)
            .ok_or_else(|| Error::UnknownNode(name.clone()))
    }

    pub fn is_tagged(&self, name: &Name) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn topo_index(&self, module: &Name) -> usize {
        self.topo_order
            .iter()
            .position(|m| m == module)
            .unwrap_or(usize::MAX)
    }

    pub fn labels(&self) -> impl Iterator<Item = &String> {
        self.by_label.keys()
    }

    /// Whether `name` is visible from a declaration at (`module`, `seq`):
    /// declared earlier in the same module, in a transitively imported
    /// module, or listed in the upstream index.
    pub fn is_visible(&self, name: &Name, module: &Name, seq: usize) -> bool {
        if let Some(entry) = self.decls.get(name) {
            if &entry.module == module {
                return entry.seq < seq;
            }
            return self
                .import_closure
                .get(module)
                .is_some_and(|c| c.contains(&entry.module));
        }
        self.upstream.contains(name)
    }

    /// Whether `name` is a known declaration at all.
    pub fn is_known(&self, name: &Name) -> bool {
        self.decls.contains_key(name) || self.upstream.contains(name)
    }
}

/// All nodes sharing `label`, in (module topological index, seq) order.
pub fn merged_nodes<'a>(store: &'a NodeStore, label: &str) -> Result<Vec<&'a Node>> {
    let names = store
        .by_label
        .get(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    Ok(names.iter().map(|n| &store.by_name[n]).collect())
}

/// True iff the node was registered from the upstream index and its defining
/// module lies under one of the configured upstream prefixes.
pub fn is_upstream(store: &NodeStore, name: &Name) -> Result<bool> {
    let node = store.node(name)?;
    Ok(node.origin == Origin::Upstream
        && node.upstream_module.as_ref().is_some_and(|m| {
            store
                .options
                .upstream_prefixes
                .iter()
                .any(|p| p == m.first())
        }))
}

pub fn build_store(
    modules: &[ModuleUnit],
    upstream: &UpstreamIndex,
    options: &StoreOptions,
) -> Result<NodeStore> {
    let mut by_module: BTreeMap<Name, &ModuleUnit> = BTreeMap::new();
    for m in modules {
        if by_module.insert(m.name.clone(), m).is_some() {
            return Err(Error::DuplicateModule(m.name.clone()));
        }
    }
    let import_graph: BTreeMap<Name, Vec<Name>> = by_module
        .iter()
        .map(|(name, m)| {
            let internal = m
                .imports
                .iter()
                .filter(|i| by_module.contains_key(*i))
                .cloned()
                .collect();
            (name.clone(), internal)
        })
        .collect();
    let topo_order = topological_order(&import_graph)?;
    let import_closure = import_closures(&import_graph, &topo_order);

    let mut store = NodeStore {
        by_name: BTreeMap::new(),
        by_label: BTreeMap::new(),
        module_order: BTreeMap::new(),
        import_graph,
        topo_order: topo_order.clone(),
        decls: BTreeMap::new(),
        upstream: upstream.clone(),
        options: options.clone(),
        import_closure,
    };

    for module in &topo_order {
        for (seq, item) in by_module[module].items.iter().enumerate() {
            if let ModuleItem::Declaration(d) = item {
                let entry = DeclEntry {
                    decl: d.clone(),
                    module: module.clone(),
                    seq,
                };
                if store.decls.insert(d.name.clone(), entry).is_some() {
                    return Err(Error::Parse {
                        module: module.to_string(),
                        line: d.span.line,
                        message: format!("`{}` is declared more than once", d.name),
                    });
                }
            }
        }
    }

    for module in &topo_order {
        let mut entries = Vec::new();
        for (seq, item) in by_module[module].items.iter().enumerate() {
            let node = match item {
                ModuleItem::RawComment(c) => {
                    entries.push(ModuleEntry::Comment(c.text.clone()));
                    continue;
                }
                ModuleItem::Declaration(d) => match &d.attribute {
                    Some(spec) => project_node(&store, d, spec, module, seq, false),
                    None => continue,
                },
                ModuleItem::UpstreamAttribution(a) => {
                    let resolver = Resolver::for_scope(&store, &a.scope, None, module, seq);
                    if let Some(target) = resolver.resolve_project(&a.target) {
                        let entry = &store.decls[&target];
                        if entry.decl.attribute.is_some() {
                            return Err(Error::DuplicateAttribute(target));
                        }
                        project_node(&store, &entry.decl, &a.spec, module, seq, true)
                    } else if let Some(target) = resolver.resolve(&a.target) {
                        upstream_node(&store, target, &a.spec, module, seq)
                    } else {
                        return Err(Error::UnknownUpstreamTarget {
                            module: module.clone(),
                            line: a.span.line,
                            target: a.target.to_string(),
                        });
                    }
                }
            };
            if store.by_name.contains_key(&node.name) {
                return Err(Error::DuplicateAttribute(node.name));
            }
            entries.push(ModuleEntry::Node(node.name.clone()));
            store
                .by_label
                .entry(node.latex_label.clone())
                .or_default()
                .push(node.name.clone());
            store.by_name.insert(node.name.clone(), node);
        }
        store.module_order.insert(module.clone(), entries);
    }
    Ok(store)
}

fn split_uses(
    resolver: &Resolver<'_>,
    list: &[NameOrLabel],
    names: &mut Vec<Name>,
    labels: &mut Vec<String>,
) {
    for entry in list {
        match entry {
            NameOrLabel::Name(n) => {
                let resolved = resolver.resolve(n).unwrap_or_else(|| n.clone());
                if !names.contains(&resolved) {
                    names.push(resolved);
                }
            }
            NameOrLabel::Label(l) => {
                if !labels.contains(l) {
                    labels.push(l.clone());
                }
            }
        }
    }
}

fn project_node(
    store: &NodeStore,
    decl: &Declaration,
    spec: &AttributeSpec,
    module: &Name,
    seq: usize,
    via_command: bool,
) -> Node {
    let entry = &store.decls[&decl.name];
    let resolver = Resolver::for_decl(store, entry);
    let kind = decl.kind;

    let mut excludes = Vec::new();
    let mut excludes_labels = Vec::new();
    split_uses(
        &resolver,
        &spec.excludes,
        &mut excludes,
        &mut excludes_labels,
    );

    let mut statement = NodePart {
        text: spec
            .statement
            .clone()
            .or_else(|| decl.docstring.clone())
            .unwrap_or_default(),
        uses: Vec::new(),
        excludes: excludes.clone(),
        uses_labels: Vec::new(),
        excludes_labels: excludes_labels.clone(),
        latex_env: spec.latex_env.clone().unwrap_or_else(|| {
            if kind.is_theorem() {
                "theorem".into()
            } else {
                "definition".into()
            }
        }),
    };
    split_uses(
        &resolver,
        &spec.uses,
        &mut statement.uses,
        &mut statement.uses_labels,
    );

    let proof = spec
        .has_proof
        .unwrap_or_else(|| kind.is_theorem())
        .then(|| {
            let mut part = NodePart {
                text: spec
                    .proof
                    .clone()
                    .unwrap_or_else(|| decl.tactic_docstrings.join(" ").trim_end().to_string()),
                uses: Vec::new(),
                excludes,
                uses_labels: Vec::new(),
                excludes_labels,
                latex_env: "proof".into(),
            };
            split_uses(
                &resolver,
                &spec.proof_uses,
                &mut part.uses,
                &mut part.uses_labels,
            );
            for marker in &decl.sorry_markers {
                let labels = marker
                    .using
                    .iter()
                    .filter(|u| matches!(u, NameOrLabel::Label(_)))
                    .cloned()
                    .collect::<Vec<_>>();
                split_uses(&resolver, &labels, &mut part.uses, &mut part.uses_labels);
            }
            part
        });

    Node {
        name: decl.name.clone(),
        latex_label: spec.label.clone().unwrap_or_else(|| decl.name.to_string()),
        statement,
        proof,
        not_ready: spec.not_ready,
        discussion: spec.discussion,
        title: spec.title.clone(),
        origin: Origin::Project,
        module: module.clone(),
        seq,
        upstream_module: None,
        kind: Some(kind),
        via_command,
    }
}

fn upstream_node(
    store: &NodeStore,
    target: Name,
    spec: &AttributeSpec,
    module: &Name,
    seq: usize,
) -> Node {
    let resolver = Resolver::for_scope(store, &Scope::default(), None, module, seq);
    let mut statement = NodePart {
        text: spec.statement.clone().unwrap_or_default(),
        uses: Vec::new(),
        excludes: Vec::new(),
        uses_labels: Vec::new(),
        excludes_labels: Vec::new(),
        latex_env: spec.latex_env.clone().unwrap_or_else(|| "theorem".into()),
    };
    split_uses(
        &resolver,
        &spec.uses,
        &mut statement.uses,
        &mut statement.uses_labels,
    );
    let proof = (spec.has_proof == Some(true)).then(|| NodePart {
        text: spec.proof.clone().unwrap_or_default(),
        uses: Vec::new(),
        excludes: Vec::new(),
        uses_labels: Vec::new(),
        excludes_labels: Vec::new(),
        latex_env: "proof".into(),
    });
    Node {
        latex_label: spec.label.clone().unwrap_or_else(|| target.to_string()),
        upstream_module: store.upstream.module_of(&target),
        name: target,
        statement,
        proof,
        not_ready: spec.not_ready,
        discussion: spec.discussion,
        title: spec.title.clone(),
        origin: Origin::Upstream,
        module: module.clone(),
        seq,
        kind: None,
        via_command: true,
    }
}

/// Kahn's algorithm with name-ordered tie breaking; reports a cycle if one
/// exists.
fn topological_order(graph: &BTreeMap<Name, Vec<Name>>) -> Result<Vec<Name>> {
    let mut pending: BTreeMap<&Name, usize> = graph
        .iter()
        .map(|(m, imports)| (m, imports.len()))
        .collect();
    let mut importers: BTreeMap<&Name, Vec<&Name>> = BTreeMap::new();
    for (m, imports) in graph {
        for i in imports {
            importers.entry(i).or_default().push(m);
        }
    }
    let mut ready: BTreeSet<&Name> = pending
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(m, _)| *m)
        .collect();
    let mut order = Vec::new();
    while let Some(m) = ready.pop_first() {
        order.push(m.clone());
        for importer in importers.get(m).into_iter().flatten() {
            let n = pending.get_mut(importer).expect("module in graph");
            *n -= 1;
            if *n == 0 {
                ready.insert(importer);
            }
        }
    }
    if order.len() < graph.len() {
        return Err(Error::ImportCycle(find_cycle(graph, &order)));
    }
    Ok(order)
}

fn find_cycle(graph: &BTreeMap<Name, Vec<Name>>, done: &[Name]) -> Vec<Name> {
    let start = graph
        .keys()
        .find(|m| !done.contains(m))
        .expect("some module is on a cycle");
    // Follow unfinished imports until a module repeats.
    let mut path = vec![start.clone()];
    loop {
        let last = path.last().unwrap();
        let next = graph[last]
            .iter()
            .find(|i| !done.contains(i))
            .expect("unfinished module has an unfinished import");
        if let Some(pos) = path.iter().position(|p| p == next) {
            let mut cycle = path[pos..].to_vec();
            cycle.push(next.clone());
            return cycle;
        }
        path.push(next.clone());
    }
}

fn import_closures(
    graph: &BTreeMap<Name, Vec<Name>>,
    topo: &[Name],
) -> BTreeMap<Name, BTreeSet<Name>> {
    let mut closure: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
    for m in topo {
        let mut set = BTreeSet::new();
        let mut queue: VecDeque<&Name> = graph[m].iter().collect();
        while let Some(i) = queue.pop_front() {
            if set.insert(i.clone()) {
                if let Some(known) = closure.get(i) {
                    set.extend(known.iter().cloned());
                } else {
                    queue.extend(graph[i].iter());
                }
            }
        }
        closure.insert(m.clone(), set);
    }
    closure
}

impl NodeStore {
    /// Restores derived indices after deserialization.
    pub fn reindex(&mut self) {
        self.import_closure = import_closures(&self.import_graph, &self.topo_order);
    }
}
