//! A small LaTeX tokenizer with brace-balanced arguments, enough to read
//! hand-written blueprint environments.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::content_hash;
use crate::name::Name;

/// Environments read as blueprint nodes.
pub const NODE_ENVS: &[&str] = &["theorem", "lemma", "definition", "corollary", "proposition"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    /// `\word`, without the backslash.
    Word(String),
    /// `\` followed by a single non-letter.
    Symbol,
    Open,
    Close,
    Comment,
    Text,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
    line: usize,
}

fn tokenize(src: &str, first_line: usize) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = first_line;
    while i < bytes.len() {
        let start = i;
        let start_line = line;
        let tok = match bytes[i] {
            b'\\' => {
                i += 1;
                if i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                        i += 1;
                    }
                    Tok::Word(src[start + 1..i].to_string())
                } else {
                    if i < bytes.len() {
                        if bytes[i] == b'\n' {
                            line += 1;
                        }
                        i += src[i..].chars().next().map_or(1, char::len_utf8);
                    }
                    Tok::Symbol
                }
            }
            b'{' => {
                i += 1;
                Tok::Open
            }
            b'}' => {
                i += 1;
                Tok::Close
            }
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                Tok::Comment
            }
            _ => {
                while i < bytes.len() && !matches!(bytes[i], b'\\' | b'{' | b'}' | b'%') {
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
                Tok::Text
            }
        };
        out.push(Token {
            tok,
            start,
            end: i,
            line: start_line,
        });
    }
    out
}

/// Where in a LaTeX file a node sits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TexSpan {
    pub file: PathBuf,
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LegacyProof {
    pub uses: Vec<String>,
    pub lean_ok: bool,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LegacyNode {
    pub env: String,
    pub title: Option<String>,
    pub label: Option<String>,
    pub lean_names: Vec<Name>,
    pub statement_uses: Vec<String>,
    pub statement_lean_ok: bool,
    pub mathlib_ok: bool,
    pub not_ready: bool,
    pub discussion: Option<u64>,
    pub statement_text: String,
    pub proof: Option<LegacyProof>,
    /// The environment plus its trailing proof, if any.
    pub span: TexSpan,
}

impl LegacyNode {
    /// Statement and proof `\uses` together, deduplicated.
    pub fn all_uses(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let proof = self.proof.iter().flat_map(|p| p.uses.iter());
        for u in self.statement_uses.iter().chain(proof) {
            if !out.contains(&u.as_str()) {
                out.push(u);
            }
        }
        out
    }
}

/// A parsed LaTeX file, remembered with the hash of the bytes it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LegacyDocument {
    pub path: PathBuf,
    pub source_hash: u64,
    pub nodes: Vec<LegacyNode>,
}

impl LegacyDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        Ok(LegacyDocument {
            path: path.to_path_buf(),
            source_hash: content_hash(text.as_bytes()),
            nodes: parse_legacy_str(text, path)?,
        })
    }
}

pub fn parse_legacy_blueprint(paths: &[PathBuf]) -> Result<Vec<LegacyNode>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(LegacyDocument::load(p)?.nodes);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
struct Env {
    name: String,
    /// Byte offset of `\begin`.
    begin: usize,
    /// Byte offset just after `\begin{name}`.
    body: usize,
    /// Byte offset of `\end`.
    end_start: usize,
    /// Byte offset just after `\end{name}`.
    end: usize,
    line: usize,
    depth: usize,
}

fn latex_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Latex {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Index of the token after whitespace-only text.
fn skip_space(tokens: &[Token], src: &str, mut i: usize) -> usize {
    while i < tokens.len()
        && tokens[i].tok == Tok::Text
        && src[tokens[i].start..tokens[i].end].trim().is_empty()
    {
        i += 1;
    }
    i
}

/// Reads a `{...}` group starting at or after `i` (whitespace allowed).
/// Returns the content byte range and the index after the closing brace.
fn group(tokens: &[Token], src: &str, i: usize) -> Option<((usize, usize), usize)> {
    let i = skip_space(tokens, src, i);
    if tokens.get(i)?.tok != Tok::Open {
        return None;
    }
    let mut depth = 0;
    for (j, t) in tokens.iter().enumerate().skip(i) {
        match t.tok {
            Tok::Open => depth += 1,
            Tok::Close => {
                depth -= 1;
                if depth == 0 {
                    return Some(((tokens[i].end, t.start), j + 1));
                }
            }
            _ => {}
        }
    }
    None
}

fn environments(src: &str, tokens: &[Token], path: &Path) -> Result<Vec<Env>> {
    let mut stack: Vec<Env> = Vec::new();
    let mut done = Vec::new();
    let mut braces: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        match &t.tok {
            Tok::Open => braces.push(t.line),
            Tok::Close => {
                if braces.pop().is_none() {
                    return Err(latex_error(path, t.line, "unmatched `}`"));
                }
            }
            Tok::Word(w) if w == "begin" || w == "end" => {
                let Some(((a, b), next)) = group(tokens, src, i + 1) else {
                    return Err(latex_error(
                        path,
                        t.line,
                        format!("`\\{w}` without an environment name"),
                    ));
                };
                let name = src[a..b].trim().to_string();
                if w == "begin" {
                    stack.push(Env {
                        name,
                        begin: t.start,
                        body: tokens[next - 1].end,
                        end_start: 0,
                        end: 0,
                        line: t.line,
                        depth: stack.len(),
                    });
                } else {
                    match stack.pop() {
                        Some(mut env) if env.name == name => {
                            env.end_start = t.start;
                            env.end = tokens[next - 1].end;
                            done.push(env);
                        }
                        Some(env) => {
                            return Err(latex_error(
                                path,
                                t.line,
                                format!(
                                    "`\\end{{{name}}}` closes `\\begin{{{}}}` from line {}",
                                    env.name, env.line
                                ),
                            ))
                        }
                        None => {
                            return Err(latex_error(
                                path,
                                t.line,
                                format!("`\\end{{{name}}}` without `\\begin`"),
                            ))
                        }
                    }
                }
                i = next;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    if let Some(env) = stack.pop() {
        return Err(latex_error(
            path,
            env.line,
            format!("`\\begin{{{}}}` is never closed", env.name),
        ));
    }
    if let Some(line) = braces.pop() {
        return Err(latex_error(path, line, "unclosed `{`"));
    }
    done.sort_by_key(|e| e.begin);
    Ok(done)
}

#[derive(Default)]
struct Interior {
    label: Option<String>,
    lean: Vec<String>,
    uses: Vec<String>,
    lean_ok: bool,
    mathlib_ok: bool,
    not_ready: bool,
    discussion: Option<String>,
    text: String,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

/// Extracts the recognized macros at brace depth zero; everything else is
/// text.
fn interior(src: &str) -> Interior {
    let tokens = tokenize(src, 1);
    let mut out = Interior::default();
    let mut kept = String::new();
    let mut depth = 0usize;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        match &t.tok {
            Tok::Open => depth += 1,
            Tok::Close => depth = depth.saturating_sub(1),
            Tok::Word(w) if depth == 0 => {
                let flag = match w.as_str() {
                    "leanok" => Some(&mut out.lean_ok),
                    "mathlibok" => Some(&mut out.mathlib_ok),
                    "notready" => Some(&mut out.not_ready),
                    _ => None,
                };
                if let Some(flag) = flag {
                    *flag = true;
                    i += 1;
                    continue;
                }
                if matches!(w.as_str(), "label" | "lean" | "uses" | "discussion") {
                    if let Some(((a, b), next)) = group(&tokens, src, i + 1) {
                        let arg = &src[a..b];
                        match w.as_str() {
                            "label" => out.label = Some(arg.trim().to_string()),
                            "lean" => out.lean.extend(split_list(arg)),
                            "uses" => out.uses.extend(split_list(arg)),
                            _ => out.discussion = Some(arg.trim().to_string()),
                        }
                        i = next;
                        continue;
                    }
                }
            }
            _ => {}
        }
        kept.push_str(&src[t.start..t.end]);
        i += 1;
    }
    out.text = clean_text(&kept);
    out
}

/// Trims each line, collapses runs of blank lines and trims the ends.
pub fn clean_text(s: &str) -> String {
    let mut lines: Vec<&str> = Vec::new();
    for line in s.lines().map(str::trim) {
        if line.is_empty() && lines.last().is_none_or(|l| l.is_empty()) {
            continue;
        }
        lines.push(line);
    }
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

/// Optional `[title]` right after `\begin{env}`: returns the title and the
/// offset after `]`.
fn title_at(src: &str, at: usize) -> Option<(String, usize)> {
    let rest = &src[at..];
    let trimmed = rest.trim_start_matches([' ', '\t']);
    if !trimmed.starts_with('[') {
        return None;
    }
    let open = at + (rest.len() - trimmed.len());
    let mut depth = 0i32;
    for (k, c) in src[open + 1..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ']' if depth == 0 => {
                let raw = src[open + 1..open + 1 + k].trim();
                let title = raw
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .unwrap_or(raw);
                return Some((title.to_string(), open + 2 + k));
            }
            _ => {}
        }
    }
    None
}

pub fn parse_legacy_str(src: &str, path: &Path) -> Result<Vec<LegacyNode>> {
    let tokens = tokenize(src, 1);
    let envs = environments(src, &tokens, path)?;
    let mut nodes = Vec::new();
    let mut covered_until = 0;
    for env in &envs {
        if env.begin < covered_until || !NODE_ENVS.contains(&env.name.as_str()) {
            continue;
        }
        let (title, body_start) = match title_at(src, env.body) {
            Some((t, at)) => (Some(t), at),
            None => (None, env.body),
        };
        let stmt = interior(&src[body_start..env.end_start]);

        let after = env.end + (src[env.end..].len() - src[env.end..].trim_start().len());
        let proof_env = envs
            .iter()
            .find(|p| p.begin == after && p.name == "proof" && p.depth == env.depth);
        let proof = proof_env.map(|p| {
            let body = interior(&src[p.body..p.end_start]);
            LegacyProof {
                uses: body.uses,
                lean_ok: body.lean_ok,
                text: body.text,
            }
        });
        let end = proof_env.map_or(env.end, |p| p.end);
        covered_until = end;

        let mut lean_names = Vec::new();
        for raw in &stmt.lean {
            let name = raw.parse::<Name>().map_err(|_| {
                latex_error(
                    path,
                    env.line,
                    format!("malformed Lean name `{raw}` in `\\lean`"),
                )
            })?;
            lean_names.push(name);
        }
        let discussion = match &stmt.discussion {
            None => None,
            Some(d) => Some(d.parse::<u64>().map_err(|_| {
                latex_error(
                    path,
                    env.line,
                    format!("`\\discussion{{{d}}}` is not a number"),
                )
            })?),
        };
        nodes.push(LegacyNode {
            env: env.name.clone(),
            title,
            label: stmt.label,
            lean_names,
            statement_uses: stmt.uses,
            statement_lean_ok: stmt.lean_ok,
            mathlib_ok: stmt.mathlib_ok,
            not_ready: stmt.not_ready,
            discussion,
            statement_text: stmt.text,
            proof,
            span: TexSpan {
                file: path.to_path_buf(),
                byte_start: env.begin,
                byte_end: end,
                line: env.line,
            },
        });
    }
    Ok(nodes)
}

/// Arguments of `\inputleannode{..}` (or of `macro`), with line numbers,
/// ignoring comments.
pub fn macro_arguments(src: &str, macro_name: &str) -> Vec<(String, usize)> {
    let tokens = tokenize(src, 1);
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if t.tok == Tok::Word(macro_name.to_string()) {
            if let Some(((a, b), _)) = group(&tokens, src, i + 1) {
                out.push((src[a..b].trim().to_string(), t.line));
            }
        }
    }
    out
}
