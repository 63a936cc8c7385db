//! The `@[blueprint …]` option grammar.

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Token, TokenKind};
use crate::error::{Error, Result};
use crate::name::{Name, NameOrLabel};

/// Options given to a `blueprint` attribute. Unset options take their
/// defaults when the node is built.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeSpec {
    pub label: Option<String>,
    pub statement: Option<String>,
    pub proof: Option<String>,
    pub has_proof: Option<bool>,
    pub uses: Vec<NameOrLabel>,
    pub proof_uses: Vec<NameOrLabel>,
    pub excludes: Vec<NameOrLabel>,
    pub title: Option<String>,
    pub not_ready: bool,
    pub discussion: Option<u64>,
    pub latex_env: Option<String>,
}

/// Normalizes docstring interior text: each line is trimmed and the
/// result has no leading or trailing blank lines.
pub fn docstring_text(raw: &str) -> String {
    raw.lines()
        .map(str::trim)
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_string()
}

/// Parses the interior of a `blueprint …` attribute item, i.e. everything
/// after the `blueprint` keyword.
pub fn parse_attribute_config(text: &str) -> Result<AttributeSpec> {
    let tokens = tokenize(text).map_err(|e| Error::Attribute(e.message))?;
    parse_attribute_tokens(&tokens)
}

pub(crate) fn parse_attribute_tokens(tokens: &[Token]) -> Result<AttributeSpec> {
    let mut spec = AttributeSpec::default();
    let mut seen: Vec<String> = Vec::new();
    let mut i = 0;

    if let Some(Token {
        kind: TokenKind::Str(label),
        ..
    }) = tokens.first()
    {
        if label.is_empty() {
            return Err(Error::Attribute("label must be nonempty".into()));
        }
        spec.label = Some(label.clone());
        i = 1;
    }

    while i < tokens.len() {
        if !tokens[i].is_symbol("(") {
            return Err(Error::Attribute(format!(
                "expected `(key := value)`, found {}",
                describe(&tokens[i])
            )));
        }
        let close = matching_paren(tokens, i)
            .ok_or_else(|| Error::Attribute("unbalanced parenthesis in option".into()))?;
        let inner = &tokens[i + 1..close];
        let key = inner
            .first()
            .and_then(Token::ident)
            .ok_or_else(|| Error::Attribute("option is missing its key".into()))?
            .to_string();
        if !inner.get(1).is_some_and(|t| t.is_symbol(":=")) {
            return Err(Error::Attribute(format!("option `{key}` is missing `:=`")));
        }
        if seen.contains(&key) {
            return Err(Error::Attribute(format!("duplicate option `{key}`")));
        }
        let value = &inner[2..];
        match key.as_str() {
            "statement" => spec.statement = Some(doc_value(&key, value)?),
            "proof" => spec.proof = Some(doc_value(&key, value)?),
            "title" => spec.title = Some(doc_value(&key, value)?),
            "hasProof" => spec.has_proof = Some(bool_value(&key, value)?),
            "notReady" => spec.not_ready = bool_value(&key, value)?,
            "uses" => spec.uses = list_value(&key, value)?,
            "proofUses" => spec.proof_uses = list_value(&key, value)?,
            "excludes" => spec.excludes = list_value(&key, value)?,
            "discussion" => {
                let n = nat_value(&key, value)?;
                if n == 0 {
                    return Err(Error::Attribute("discussion must be at least 1".into()));
                }
                spec.discussion = Some(n);
            }
            "latexEnv" => match value {
                [Token {
                    kind: TokenKind::Str(s),
                    ..
                }] if !s.is_empty() => spec.latex_env = Some(s.clone()),
                _ => return Err(bad_value(&key, "a nonempty string literal")),
            },
            other => return Err(Error::Attribute(format!("unknown option `{other}`"))),
        }
        seen.push(key);
        i = close + 1;
    }
    Ok(spec)
}

fn describe(tok: &Token) -> String {
    match &tok.kind {
        TokenKind::Ident(s) => format!("`{s}`"),
        TokenKind::Str(s) => format!("\"{s}\""),
        TokenKind::DocComment(_) => "a docstring".into(),
        TokenKind::Symbol(s) => format!("`{s}`"),
        TokenKind::Other(c) => format!("`{c}`"),
        TokenKind::Number(n) => format!("`{n}`"),
        TokenKind::Char => "a character literal".into(),
    }
}

fn matching_paren(tokens: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, t) in tokens.iter().enumerate().skip(open) {
        if t.is_symbol("(") {
            depth += 1;
        } else if t.is_symbol(")") {
            depth -= 1;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

fn bad_value(key: &str, expected: &str) -> Error {
    Error::Attribute(format!("option `{key}` expects {expected}"))
}

fn doc_value(key: &str, value: &[Token]) -> Result<String> {
    match value {
        [Token {
            kind: TokenKind::DocComment(raw),
            ..
        }] => Ok(docstring_text(raw)),
        _ => Err(bad_value(key, "a docstring `/-- … -/`")),
    }
}

fn bool_value(key: &str, value: &[Token]) -> Result<bool> {
    match value {
        [t] if t.is_ident("true") => Ok(true),
        [t] if t.is_ident("false") => Ok(false),
        _ => Err(bad_value(key, "`true` or `false`")),
    }
}

fn nat_value(key: &str, value: &[Token]) -> Result<u64> {
    match value {
        [Token {
            kind: TokenKind::Number(digits),
            ..
        }] => digits
            .parse::<u64>()
            .map_err(|_| bad_value(key, "a natural number")),
        _ => Err(bad_value(key, "a natural number")),
    }
}

fn list_value(key: &str, value: &[Token]) -> Result<Vec<NameOrLabel>> {
    let well_formed = value.len() >= 2
        && value.first().is_some_and(|t| t.is_symbol("["))
        && value.last().is_some_and(|t| t.is_symbol("]"));
    if !well_formed {
        return Err(bad_value(key, "a list `[a, \"b\"]`"));
    }
    let inner = &value[1..value.len() - 1];
    let mut out = Vec::new();
    for (idx, chunk) in inner.split(|t| t.is_symbol(",")).enumerate() {
        match chunk {
            [] if inner.is_empty() && idx == 0 => {}
            [Token {
                kind: TokenKind::Ident(s),
                ..
            }] => out.push(NameOrLabel::Name(s.parse::<Name>()?)),
            [Token {
                kind: TokenKind::Str(s),
                ..
            }] if !s.is_empty() => out.push(NameOrLabel::Label(s.clone())),
            _ => return Err(bad_value(key, "names or string labels separated by commas")),
        }
    }
    Ok(out)
}
