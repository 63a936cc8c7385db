//! Lexical reference scanning.

use super::lexer::{tokenize, TokenKind};

/// Words of the MiniLean grammar that never name a declaration.
const KEYWORDS: &[&str] = &[
    "def",
    "abbrev",
    "theorem",
    "lemma",
    "inductive",
    "structure",
    "instance",
    "axiom",
    "example",
    "import",
    "namespace",
    "section",
    "end",
    "open",
    "attribute",
    "blueprint_comment",
    "private",
    "protected",
    "noncomputable",
    "partial",
    "unsafe",
    "nonrec",
    "where",
    "extends",
    "deriving",
    "match",
    "with",
    "fun",
    "by",
    "do",
    "let",
    "have",
    "show",
    "from",
    "if",
    "then",
    "else",
    "at",
    "in",
    "calc",
    "exact",
    "sorry",
    "sorry_using",
    "Type",
    "Prop",
    "Sort",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Identifier-shaped tokens of `text` in source order, without keywords and
/// without anything inside comments, docstrings or string literals.
///
/// Text that fails to tokenize (an unterminated comment, say) yields the
/// identifiers seen before the failure point.
pub fn scan_identifiers(text: &str) -> Vec<String> {
    let tokens = match tokenize(text) {
        Ok(tokens) => tokens,
        Err(err) => return scan_identifiers(&text[..err.offset]),
    };
    tokens
        .into_iter()
        .filter_map(|t| match t.kind {
            TokenKind::Ident(s) if !is_keyword(&s) => Some(s),
            _ => None,
        })
        .collect()
}
