//! Dependency inference and formalization status.
//!
//! References are found lexically and resolved against the declarations
//! visible at each point. The closure walks references breadth-first and
//! stops at blueprint-tagged declarations, collecting them and `sorryAx`.

use std::collections::{BTreeMap, HashSet, VecDeque};

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::name::{Name, NameOrLabel};
use crate::source::lexer::{tokenize, TokenKind};
use crate::source::{is_keyword, scan_identifiers, Declaration, Scope};
use crate::store::{is_upstream, DeclEntry, Node, NodeStore, Origin, Part};

/// Resolves identifier tokens to declaration names at one point of a module.
pub struct Resolver<'a> {
    store: &'a NodeStore,
    prefixes: Vec<Name>,
    opens: Vec<Name>,
    module: Name,
    seq: usize,
}

impl<'a> Resolver<'a> {
    pub fn for_decl(store: &'a NodeStore, entry: &DeclEntry) -> Self {
        Self::for_scope(
            store,
            &entry.decl.scope,
            Some(&entry.decl.name),
            &entry.module,
            entry.seq,
        )
    }

    /// `decl_name`, when given, contributes its own namespace prefixes
    /// (a declaration `A.B.c` resolves under `A.B` then `A`).
    pub fn for_scope(
        store: &'a NodeStore,
        scope: &Scope,
        decl_name: Option<&Name>,
        module: &Name,
        seq: usize,
    ) -> Self {
        let mut prefixes = Vec::new();
        let mut push_chain = |start: Option<Name>| {
            let mut cur = start;
            while let Some(p) = cur {
                if !prefixes.contains(&p) {
                    prefixes.push(p.clone());
                }
                cur = p.parent();
            }
        };
        push_chain(decl_name.and_then(Name::parent));
        push_chain(scope.namespace.clone());
        Resolver {
            store,
            prefixes,
            opens: scope.opens.clone(),
            module: module.clone(),
            seq,
        }
    }

    fn candidates(&self, token: &Name) -> Vec<Name> {
        let mut out: Vec<Name> = self.prefixes.iter().map(|p| p.join(token)).collect();
        out.extend(self.opens.iter().map(|o| o.join(token)));
        out.push(token.clone());
        out
    }

    fn resolve_with(&self, token: &Name, accept: impl Fn(&Name) -> bool) -> Option<Name> {
        let mut current = Some(token.clone());
        while let Some(t) = current {
            if let Some(hit) = self.candidates(&t).into_iter().find(|c| accept(c)) {
                return Some(hit);
            }
            // `x.f` where `x` is a local: retry as `f` (field notation).
            current = t.drop_first();
        }
        None
    }

    /// Resolves to any visible project or upstream declaration.
    pub fn resolve(&self, token: &Name) -> Option<Name> {
        self.resolve_with(token, |c| self.store.is_visible(c, &self.module, self.seq))
    }

    /// Resolves to a visible project declaration only.
    pub fn resolve_project(&self, token: &Name) -> Option<Name> {
        self.resolve_with(token, |c| {
            self.store.decls.contains_key(c) && self.store.is_visible(c, &self.module, self.seq)
        })
    }

    /// Visible project declarations carrying `@[simp]`.
    fn simp_set(&self) -> Vec<Name> {
        self.store
            .decls
            .values()
            .filter(|e| e.decl.has_simp_attribute())
            .filter(|e| self.store.is_visible(&e.decl.name, &self.module, self.seq))
            .map(|e| (self.store.topo_index(&e.module), e.seq, e.decl.name.clone()))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|(_, _, n)| n)
            .collect()
    }
}

/// Direct resolved references of one declaration, in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RefSets {
    pub statement_refs: IndexSet<Name>,
    pub body_refs: IndexSet<Name>,
}

impl RefSets {
    /// Signature and body references together.
    pub fn all(&self) -> impl Iterator<Item = &Name> {
        self.statement_refs.iter().chain(self.body_refs.iter())
    }
}

const SIMP_TACTICS: &[&str] = &[
    "simp",
    "simp_all",
    "simpa",
    "simp?",
    "simp_all?",
    "simpa?",
    "dsimp",
];

pub fn resolve_references(decl: &Declaration, store: &NodeStore) -> Result<RefSets> {
    let entry = store
        .decls
        .get(&decl.name)
        .ok_or_else(|| Error::UnknownNode(decl.name.clone()))?;
    let resolver = Resolver::for_decl(store, entry);
    let me = &decl.name;
    let mut refs = RefSets::default();

    for raw in scan_identifiers(&decl.signature_text) {
        if let Some(n) = raw.parse::<Name>().ok().and_then(|t| resolver.resolve(&t)) {
            if &n != me {
                refs.statement_refs.insert(n);
            }
        }
    }
    if decl.signature_sorry {
        refs.statement_refs.insert(Name::sorry_ax());
    }

    let Some(body) = &decl.body_text else {
        return Ok(refs);
    };
    let tokens = tokenize(body).map_err(|e| Error::Parse {
        module: entry.module.to_string(),
        line: decl.span.line + e.line - 1,
        message: e.message,
    })?;
    let mut i = 0;
    while i < tokens.len() {
        let TokenKind::Ident(word) = &tokens[i].kind else {
            i += 1;
            continue;
        };
        match word.as_str() {
            "sorry" => {
                refs.body_refs.insert(Name::sorry_ax());
            }
            "sorry_using" => {
                refs.body_refs.insert(Name::sorry_ax());
                let marker = decl.sorry_markers.iter().find(|m| {
                    m.span.byte_start == decl.layout.body.map_or(0, |b| b.0) + tokens[i].start
                });
                for entry in marker.map(|m| m.using.as_slice()).unwrap_or_default() {
                    let NameOrLabel::Name(arg) = entry else {
                        continue;
                    };
                    let resolved =
                        resolver
                            .resolve(arg)
                            .ok_or_else(|| Error::UnresolvedSorryUsing {
                                module: entry_module(store, decl),
                                line: marker.map_or(decl.span.line, |m| m.span.line),
                                argument: arg.to_string(),
                            })?;
                    if &resolved != me {
                        refs.body_refs.insert(resolved);
                    }
                }
                // Skip the list; its entries were handled above.
                if tokens.get(i + 1).is_some_and(|t| t.is_symbol("[")) {
                    let mut depth = 0;
                    i += 1;
                    while i < tokens.len() {
                        if tokens[i].is_symbol("[") {
                            depth += 1;
                        } else if tokens[i].is_symbol("]") {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        i += 1;
                    }
                }
            }
            w if SIMP_TACTICS.contains(&w) => {
                if !tokens.get(i + 1).is_some_and(|t| t.is_ident("only")) {
                    for n in resolver.simp_set() {
                        if &n != me {
                            refs.body_refs.insert(n);
                        }
                    }
                }
            }
            w if is_keyword(w) => {}
            w => {
                if let Some(n) = w.parse::<Name>().ok().and_then(|t| resolver.resolve(&t)) {
                    if &n != me {
                        refs.body_refs.insert(n);
                    }
                }
            }
        }
        i += 1;
    }
    Ok(refs)
}

fn entry_module(store: &NodeStore, decl: &Declaration) -> Name {
    store
        .decls
        .get(&decl.name)
        .map_or_else(|| decl.span.module.clone(), |e| e.module.clone())
}

/// Breadth-first closure from `start`.
///
/// A tagged constant is collected and not entered; `sorryAx` is collected;
/// any other constant is entered through `refs_of`. `root` counts as already
/// visited. The result is in first-discovery order.
pub fn reference_closure<'n, T, R, I>(
    start: impl IntoIterator<Item = &'n Name>,
    root: Option<&Name>,
    is_tagged: T,
    refs_of: R,
) -> Vec<Name>
where
    T: Fn(&Name) -> bool,
    R: Fn(&Name) -> I,
    I: IntoIterator<Item = Name>,
{
    let mut visited: HashSet<Name> = root.into_iter().cloned().collect();
    let mut queue = VecDeque::new();
    for s in start {
        if visited.insert(s.clone()) {
            queue.push_back(s.clone());
        }
    }
    let mut out = Vec::new();
    while let Some(c) = queue.pop_front() {
        if c.is_sorry_ax() || is_tagged(&c) {
            out.push(c);
            continue;
        }
        for r in refs_of(&c) {
            if visited.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartStatus {
    /// Tagged nodes reached, without `sorryAx` or the node itself.
    pub inferred_uses: Vec<Name>,
    pub lean_ok: bool,
    pub mathlib_ok: bool,
}

/// References of every project declaration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub refs: BTreeMap<Name, RefSets>,
}

impl ReferenceTable {
    pub fn build(store: &NodeStore) -> Result<Self> {
        let mut refs = BTreeMap::new();
        for (name, entry) in &store.decls {
            refs.insert(name.clone(), resolve_references(&entry.decl, store)?);
        }
        Ok(ReferenceTable { refs })
    }

    /// Signature and body references; empty for upstream names.
    pub fn full(&self, name: &Name) -> Vec<Name> {
        self.refs
            .get(name)
            .map(|r| r.all().cloned().collect())
            .unwrap_or_default()
    }
}

pub fn part_status(
    node: &Node,
    part: Part,
    store: &NodeStore,
    table: &ReferenceTable,
) -> Result<PartStatus> {
    if part == Part::Proof && node.proof.is_none() {
        return Err(Error::NoProofPart(node.name.clone()));
    }
    if node.origin == Origin::Upstream {
        return Ok(PartStatus {
            inferred_uses: Vec::new(),
            lean_ok: true,
            mathlib_ok: part == Part::Statement && is_upstream(store, &node.name)?,
        });
    }
    let refs = table.refs.get(&node.name).cloned().unwrap_or_default();
    let kind = store.decls.get(&node.name).map(|e| e.decl.kind);
    let start: Vec<&Name> = match part {
        Part::Statement if kind.is_some_and(|k| k.is_definition()) => refs
            .statement_refs
            .iter()
            .chain(refs.body_refs.iter())
            .collect(),
        Part::Statement => refs.statement_refs.iter().collect(),
        Part::Proof => refs.body_refs.iter().collect(),
    };
    let closure = reference_closure(
        start,
        Some(&node.name),
        |n| store.is_tagged(n),
        |n| table.full(n),
    );
    let lean_ok = !closure.iter().any(Name::is_sorry_ax);
    Ok(PartStatus {
        inferred_uses: closure
            .into_iter()
            .filter(|n| !n.is_sorry_ax() && n != &node.name)
            .collect(),
        lean_ok,
        mathlib_ok: false,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeStatus {
    pub statement: PartStatus,
    pub proof: Option<PartStatus>,
}

/// Labels a part depends on, plus warnings about labels with no node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveUses {
    pub labels: Vec<String>,
    pub warnings: Vec<String>,
}

/// `(inferred ∪ explicit names) ++ usesLabels`, minus exclusions and the
/// node's own label, as labels in first-occurrence order.
///
/// A proof does not repeat what its statement already infers: inferred proof
/// uses that the statement also infers are dropped.
pub fn effective_uses(
    node: &Node,
    part: Part,
    store: &NodeStore,
    status: &NodeStatus,
) -> Result<EffectiveUses> {
    let node_part = node
        .part(part)
        .ok_or_else(|| Error::NoProofPart(node.name.clone()))?;
    let part_status = match part {
        Part::Statement => &status.statement,
        Part::Proof => status
            .proof
            .as_ref()
            .ok_or_else(|| Error::NoProofPart(node.name.clone()))?,
    };
    let label_of = |n: &Name| -> Result<String> {
        store
            .by_name
            .get(n)
            .map(|x| x.latex_label.clone())
            .ok_or_else(|| Error::UnknownExplicitUse {
                node: node.name.clone(),
                target: n.to_string(),
            })
    };

    let mut names: IndexSet<&Name> = IndexSet::new();
    for n in &part_status.inferred_uses {
        if part == Part::Proof && status.statement.inferred_uses.contains(n) {
            continue;
        }
        names.insert(n);
    }
    names.extend(node_part.uses.iter());

    let mut labels: IndexSet<String> = IndexSet::new();
    for n in names {
        labels.insert(label_of(n)?);
    }
    let mut warnings = Vec::new();
    for l in &node_part.uses_labels {
        if !store.by_label.contains_key(l) {
            warnings.push(format!(
                "`{}` uses label `{l}`, which has no node",
                node.name
            ));
        }
        labels.insert(l.clone());
    }
    for n in &node_part.excludes {
        if let Some(x) = store.by_name.get(n) {
            labels.shift_remove(&x.latex_label);
        }
    }
    for l in &node_part.excludes_labels {
        labels.shift_remove(l);
    }
    labels.shift_remove(&node.latex_label);
    Ok(EffectiveUses {
        labels: labels.into_iter().collect(),
        warnings,
    })
}

/// Statuses and effective uses for every node of a store.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub references: ReferenceTable,
    pub statuses: BTreeMap<Name, NodeStatus>,
    pub statement_uses: BTreeMap<Name, Vec<String>>,
    pub proof_uses: BTreeMap<Name, Vec<String>>,
    pub warnings: Vec<String>,
}

impl Analysis {
    pub fn run(store: &NodeStore) -> Result<Analysis> {
        let references = ReferenceTable::build(store)?;
        let mut analysis = Analysis {
            references,
            ..Analysis::default()
        };
        for node in store.by_name.values() {
            let statement = part_status(node, Part::Statement, store, &analysis.references)?;
            let proof = match node.proof {
                Some(_) => Some(part_status(node, Part::Proof, store, &analysis.references)?),
                None => None,
            };
            let status = NodeStatus { statement, proof };
            let uses = effective_uses(node, Part::Statement, store, &status)?;
            analysis.warnings.extend(uses.warnings);
            analysis
                .statement_uses
                .insert(node.name.clone(), uses.labels);
            if node.proof.is_some() {
                let uses = effective_uses(node, Part::Proof, store, &status)?;
                analysis.warnings.extend(uses.warnings);
                analysis.proof_uses.insert(node.name.clone(), uses.labels);
            }
            analysis.statuses.insert(node.name.clone(), status);
        }
        Ok(analysis)
    }

    pub fn status(&self, name: &Name) -> Result<&NodeStatus> {
        self.statuses
            .get(name)
            .ok_or_else(|| Error::UnknownNode(name.clone()))
    }

    pub fn uses(&self, name: &Name, part: Part) -> &[String] {
        let map = match part {
            Part::Statement => &self.statement_uses,
            Part::Proof => &self.proof_uses,
        };
        map.get(name).map(Vec::as_slice).unwrap_or_default()
    }
}
