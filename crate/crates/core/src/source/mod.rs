//! Source model: parsing MiniLean modules into declarations, attributes,
//! docstrings and `sorry` markers.

mod attribute;
pub mod lexer;
mod parser;
mod scan;

use serde::{Deserialize, Serialize};

pub use attribute::{docstring_text, parse_attribute_config, AttributeSpec};
pub use parser::{parse_module, parse_module_str};
pub use scan::{is_keyword, scan_identifiers};

use crate::name::{Name, NameOrLabel, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeclKind {
    Def,
    Abbrev,
    Theorem,
    Lemma,
    Inductive,
    Structure,
    Instance,
    Axiom,
}

impl DeclKind {
    pub fn from_keyword(kw: &str) -> Option<DeclKind> {
        Some(match kw {
            "def" => DeclKind::Def,
            "abbrev" => DeclKind::Abbrev,
            "theorem" => DeclKind::Theorem,
            "lemma" => DeclKind::Lemma,
            "inductive" => DeclKind::Inductive,
            "structure" => DeclKind::Structure,
            "instance" => DeclKind::Instance,
            "axiom" => DeclKind::Axiom,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            DeclKind::Def => "def",
            DeclKind::Abbrev => "abbrev",
            DeclKind::Theorem => "theorem",
            DeclKind::Lemma => "lemma",
            DeclKind::Inductive => "inductive",
            DeclKind::Structure => "structure",
            DeclKind::Instance => "instance",
            DeclKind::Axiom => "axiom",
        }
    }

    pub fn is_theorem(self) -> bool {
        matches!(self, DeclKind::Theorem | DeclKind::Lemma)
    }

    /// Kinds whose value counts toward the statement's dependencies.
    pub fn is_definition(self) -> bool {
        matches!(self, DeclKind::Def | DeclKind::Abbrev | DeclKind::Instance)
    }

    /// Whether the whole declaration is a type with no separate value.
    pub fn is_type_former(self) -> bool {
        matches!(self, DeclKind::Inductive | DeclKind::Structure)
    }
}

/// A `sorry` or `sorry_using [..]` occurrence inside a declaration body.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SorryMarker {
    pub span: SourceSpan,
    pub using: Vec<NameOrLabel>,
}

/// Name-resolution context at the point of a command.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    /// Current namespace, if any (`namespace A` then `namespace B` gives `A.B`).
    pub namespace: Option<Name>,
    /// `open`ed namespaces in effect, in the order they were opened.
    pub opens: Vec<Name>,
}

/// Byte offsets into the module source locating the parts of a declaration
/// header; the converter inserts attributes relative to these.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderLayout {
    /// Offset of the first modifier or the declaration keyword.
    pub keyword_start: usize,
    /// Offset of the closing `]` of the last `@[…]` list, if present.
    pub attr_list_close: Option<usize>,
    pub signature: (usize, usize),
    pub body: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: Name,
    pub kind: DeclKind,
    pub docstring: Option<String>,
    pub attribute: Option<AttributeSpec>,
    /// Names of the other attributes in the `@[…]` lists, e.g. `simp`.
    pub other_attributes: Vec<String>,
    pub signature_text: String,
    pub body_text: Option<String>,
    pub tactic_docstrings: Vec<String>,
    pub sorry_markers: Vec<SorryMarker>,
    /// `sorry` occurring in the signature itself.
    pub signature_sorry: bool,
    pub scope: Scope,
    pub layout: HeaderLayout,
    pub span: SourceSpan,
}

impl Declaration {
    pub fn has_simp_attribute(&self) -> bool {
        self.other_attributes.iter().any(|a| a == "simp")
    }
}

/// Raw LaTeX written with `blueprint_comment /-- … -/`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawComment {
    pub text: String,
    pub span: SourceSpan,
}

/// `attribute [blueprint …] Target`, tagging a declaration defined elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpstreamAttribution {
    /// The target exactly as written; resolved against the scope later.
    pub target: Name,
    pub spec: AttributeSpec,
    pub scope: Scope,
    pub span: SourceSpan,
}

impl UpstreamAttribution {
    pub fn label(&self) -> Option<&str> {
        self.spec.label.as_deref()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "camelCase")]
#[allow(clippy::large_enum_variant)]
pub enum ModuleItem {
    Declaration(Declaration),
    RawComment(RawComment),
    UpstreamAttribution(UpstreamAttribution),
}

impl ModuleItem {
    pub fn span(&self) -> &SourceSpan {
        match self {
            ModuleItem::Declaration(d) => &d.span,
            ModuleItem::RawComment(c) => &c.span,
            ModuleItem::UpstreamAttribution(a) => &a.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleUnit {
    pub name: Name,
    pub imports: Vec<Name>,
    pub items: Vec<ModuleItem>,
    pub source_hash: u64,
    pub warnings: Vec<ParseWarning>,
}

impl ModuleUnit {
    pub fn declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.items.iter().filter_map(|item| match item {
            ModuleItem::Declaration(d) => Some(d),
            _ => None,
        })
    }
}
