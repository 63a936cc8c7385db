//! Top-level command parser for MiniLean modules.

use std::fs;
use std::path::Path;

use super::attribute::{docstring_text, parse_attribute_tokens, AttributeSpec};
use super::lexer::{tokenize, Token, TokenKind};
use super::{
    DeclKind, Declaration, HeaderLayout, ModuleItem, ModuleUnit, ParseWarning, RawComment, Scope,
    SorryMarker, UpstreamAttribution,
};
use crate::error::{Error, Result};
use crate::hash::content_hash;
use crate::name::{Name, NameOrLabel, SourceSpan};

const MODIFIERS: &[&str] = &[
    "private",
    "protected",
    "noncomputable",
    "partial",
    "unsafe",
    "nonrec",
];

/// Commands that terminate a declaration but are otherwise skipped.
const OTHER_COMMANDS: &[&str] = &[
    "example",
    "variable",
    "universe",
    "set_option",
    "notation",
    "infix",
    "infixl",
    "infixr",
    "prefix",
    "postfix",
    "macro",
    "macro_rules",
    "syntax",
    "elab",
    "mutual",
];

pub fn parse_module(path: &Path, module: Name) -> Result<ModuleUnit> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let src = String::from_utf8(bytes).map_err(|e| Error::Parse {
        module: path.display().to_string(),
        line: 1,
        message: format!("file is not valid UTF-8: {e}"),
    })?;
    parse_module_str(&src, module)
}

pub fn parse_module_str(src: &str, module: Name) -> Result<ModuleUnit> {
    let tokens = tokenize(src).map_err(|e| Error::Parse {
        module: module.to_string(),
        line: e.line,
        message: e.message,
    })?;
    let mut parser = Parser {
        src,
        tokens: &tokens,
        module,
        pos: 0,
        frames: Vec::new(),
        file_opens: Vec::new(),
        imports: Vec::new(),
        items: Vec::new(),
        warnings: Vec::new(),
    };
    parser.run()?;
    Ok(ModuleUnit {
        name: parser.module,
        imports: parser.imports,
        items: parser.items,
        source_hash: content_hash(src.as_bytes()),
        warnings: parser.warnings,
    })
}

struct Frame {
    /// `None` for sections.
    namespace: Option<Name>,
    label: Option<String>,
    opens: Vec<Name>,
}

struct Parser<'a> {
    src: &'a str,
    tokens: &'a [Token],
    module: Name,
    pos: usize,
    frames: Vec<Frame>,
    file_opens: Vec<Name>,
    imports: Vec<Name>,
    items: Vec<ModuleItem>,
    warnings: Vec<ParseWarning>,
}

fn is_decl_start(tok: &Token) -> bool {
    tok.is_symbol("@[")
        || tok
            .ident()
            .is_some_and(|w| DeclKind::from_keyword(w).is_some() || MODIFIERS.contains(&w))
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn at(&self, i: usize) -> Option<&'a Token> {
        self.tokens.get(i)
    }

    fn warn(&mut self, line: usize, message: impl Into<String>) {
        self.warnings.push(ParseWarning {
            line,
            message: message.into(),
        });
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            module: self.module.to_string(),
            line,
            message: message.into(),
        }
    }

    fn span(&self, start: usize, end: usize, line: usize) -> SourceSpan {
        SourceSpan {
            module: self.module.clone(),
            byte_start: start,
            byte_end: end,
            line,
        }
    }

    fn current_namespace(&self) -> Option<Name> {
        self.frames.iter().rev().find_map(|f| f.namespace.clone())
    }

    fn scope(&self) -> Scope {
        Scope {
            namespace: self.current_namespace(),
            opens: self
                .file_opens
                .iter()
                .chain(self.frames.iter().flat_map(|f| f.opens.iter()))
                .cloned()
                .collect(),
        }
    }

    /// Whether token `i` begins a new top-level command.
    fn is_command_start(&self, i: usize) -> bool {
        let Some(tok) = self.at(i) else {
            return false;
        };
        match &tok.kind {
            TokenKind::DocComment(_) => self.at(i + 1).is_some_and(is_decl_start),
            TokenKind::Symbol("@[") => true,
            TokenKind::Ident(w) => {
                DeclKind::from_keyword(w).is_some()
                    || MODIFIERS.contains(&w.as_str())
                    || OTHER_COMMANDS.contains(&w.as_str())
                    || matches!(
                        w.as_str(),
                        "import"
                            | "namespace"
                            | "section"
                            | "end"
                            | "open"
                            | "attribute"
                            | "blueprint_comment"
                    )
            }
            TokenKind::Other('#') => self
                .at(i + 1)
                .is_some_and(|n| n.ident().is_some() && n.start == tok.end),
            _ => false,
        }
    }

    fn skip_to_next_command(&mut self) {
        self.pos += 1;
        while self.pos < self.tokens.len() && !self.is_command_start(self.pos) {
            self.pos += 1;
        }
    }

    fn run(&mut self) -> Result<()> {
        while let Some(tok) = self.peek() {
            match &tok.kind {
                TokenKind::Ident(w) => match w.as_str() {
                    "import" => self.parse_import(),
                    "namespace" => self.parse_namespace(),
                    "section" => self.parse_section(),
                    "end" => self.parse_end(),
                    "open" => self.parse_open(),
                    "blueprint_comment" => self.parse_blueprint_comment(),
                    "attribute" => self.parse_attribute_command()?,
                    _ if is_decl_start(tok) => self.parse_declaration()?,
                    other => {
                        let msg = if OTHER_COMMANDS.contains(&other) {
                            format!("unsupported command `{other}` skipped")
                        } else {
                            format!("unrecognized input `{other}` skipped")
                        };
                        self.warn(tok.line, msg);
                        self.skip_to_next_command();
                    }
                },
                TokenKind::Symbol("@[") | TokenKind::DocComment(_) => self.parse_declaration()?,
                _ => {
                    let text = &self.src[tok.start..tok.end];
                    self.warn(tok.line, format!("unrecognized input `{text}` skipped"));
                    self.skip_to_next_command();
                }
            }
        }
        Ok(())
    }

    fn parse_import(&mut self) {
        let kw = self.peek().unwrap();
        self.pos += 1;
        match self.peek().and_then(|t| t.ident().map(|s| (t, s))) {
            Some((tok, name)) => {
                self.pos += 1;
                match name.parse::<Name>() {
                    Ok(name) if !self.imports.contains(&name) => self.imports.push(name),
                    Ok(_) => self.warn(tok.line, format!("duplicate import `{name}`")),
                    Err(_) => self.warn(tok.line, format!("malformed import `{name}`")),
                }
            }
            None => self.warn(kw.line, "`import` without a module name"),
        }
    }

    fn parse_namespace(&mut self) {
        let kw = self.peek().unwrap();
        self.pos += 1;
        let Some(ident) = self.peek().and_then(Token::ident) else {
            self.warn(kw.line, "`namespace` without a name");
            return;
        };
        self.pos += 1;
        let Ok(rel) = ident.parse::<Name>() else {
            self.warn(kw.line, format!("malformed namespace `{ident}`"));
            return;
        };
        let full = match self.current_namespace() {
            Some(ns) => ns.join(&rel),
            None => rel,
        };
        self.frames.push(Frame {
            namespace: Some(full),
            label: Some(ident.to_string()),
            opens: Vec::new(),
        });
    }

    fn parse_section(&mut self) {
        self.pos += 1;
        let label = self.section_label();
        self.frames.push(Frame {
            namespace: None,
            label,
            opens: Vec::new(),
        });
    }

    /// Optional name following `section`/`end` on the same line.
    fn section_label(&mut self) -> Option<String> {
        let prev_line = self.tokens[self.pos - 1].line;
        let tok = self.peek()?;
        let ident = tok.ident()?;
        if tok.line != prev_line || self.is_command_start(self.pos) {
            return None;
        }
        self.pos += 1;
        Some(ident.to_string())
    }

    fn parse_end(&mut self) {
        let line = self.peek().unwrap().line;
        self.pos += 1;
        let label = self.section_label();
        match self.frames.pop() {
            Some(frame) if frame.label == label => {}
            Some(frame) => self.warn(
                line,
                format!(
                    "`end {}` closes `{}`",
                    label.unwrap_or_default(),
                    frame.label.unwrap_or_default()
                ),
            ),
            None => self.warn(line, "`end` without an open namespace or section"),
        }
    }

    fn parse_open(&mut self) {
        let line = self.peek().unwrap().line;
        self.pos += 1;
        let mut opened = Vec::new();
        while let Some(tok) = self.peek() {
            match tok.ident() {
                Some("in") => {
                    self.pos += 1;
                    break;
                }
                Some(w) if !self.is_command_start(self.pos) => {
                    if let Ok(n) = w.parse::<Name>() {
                        opened.push(n);
                    }
                    self.pos += 1;
                }
                _ => break,
            }
        }
        if opened.is_empty() {
            self.warn(line, "`open` without namespaces");
        }
        match self.frames.last_mut() {
            Some(frame) => frame.opens.extend(opened),
            None => self.file_opens.extend(opened),
        }
    }

    fn parse_blueprint_comment(&mut self) {
        let kw = self.peek().unwrap();
        self.pos += 1;
        match self.peek() {
            Some(
                doc @ Token {
                    kind: TokenKind::DocComment(raw),
                    ..
                },
            ) => {
                self.pos += 1;
                let span = self.span(kw.start, doc.end, kw.line);
                self.items.push(ModuleItem::RawComment(RawComment {
                    text: docstring_text(raw),
                    span,
                }));
            }
            _ => self.warn(kw.line, "`blueprint_comment` without a docstring"),
        }
    }

    /// Index of the `]` closing the bracket opened at token `open`.
    fn matching_bracket(&self, open: usize) -> Result<usize> {
        let mut depth = 0usize;
        for j in open..self.tokens.len() {
            let t = &self.tokens[j];
            if t.is_symbol("[") || t.is_symbol("@[") {
                depth += 1;
            } else if t.is_symbol("]") {
                depth -= 1;
                if depth == 0 {
                    return Ok(j);
                }
            }
        }
        let tok = &self.tokens[open];
        Err(self.error(
            tok.line,
            format!(
                "`{}` at byte {} is never closed by `]`",
                &self.src[tok.start..tok.end],
                tok.start
            ),
        ))
    }

    /// Splits `tokens[from..to]` on depth-0 commas.
    fn split_entries(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut start = from;
        for j in from..to {
            let t = &self.tokens[j];
            match &t.kind {
                TokenKind::Symbol("(" | "[" | "{" | "⟨" | "@[") => depth += 1,
                TokenKind::Symbol(")" | "]" | "}" | "⟩") => depth -= 1,
                TokenKind::Symbol(",") if depth == 0 => {
                    out.push((start, j));
                    start = j + 1;
                }
                _ => {}
            }
        }
        out.push((start, to));
        out
    }

    /// Parses the entries of an attribute list, returning the blueprint spec
    /// (if any) and the names of the remaining attributes.
    fn attribute_entries(
        &self,
        from: usize,
        to: usize,
    ) -> Result<(Option<AttributeSpec>, Vec<String>, bool)> {
        let mut spec = None;
        let mut others = Vec::new();
        let mut removal = false;
        for (a, b) in self.split_entries(from, to) {
            if a == b {
                continue;
            }
            let first = &self.tokens[a];
            if first.is_ident("blueprint") {
                if spec.is_some() {
                    return Err(self.error(first.line, "`blueprint` listed twice"));
                }
                let parsed = parse_attribute_tokens(&self.tokens[a + 1..b])
                    .map_err(|e| self.error(first.line, e.to_string()))?;
                spec = Some(parsed);
            } else if matches!(first.kind, TokenKind::Other('-'))
                && self.at(a + 1).is_some_and(|t| t.is_ident("blueprint"))
            {
                removal = true;
            } else if let Some(w) = first.ident() {
                others.push(w.to_string());
            }
        }
        Ok((spec, others, removal))
    }

    fn parse_attribute_command(&mut self) -> Result<()> {
        let kw = self.peek().unwrap();
        let start = self.pos;
        self.pos += 1;
        if !self.peek().is_some_and(|t| t.is_symbol("[")) {
            self.warn(kw.line, "`attribute` without `[…]`");
            self.pos = start;
            self.skip_to_next_command();
            return Ok(());
        }
        let close = self.matching_bracket(self.pos)?;
        let (spec, _, removal) = self.attribute_entries(self.pos + 1, close)?;
        self.pos = close + 1;
        let mut targets = Vec::new();
        let line = self.tokens[close].line;
        while let Some(tok) = self.peek() {
            match tok.ident() {
                Some(w) if !self.is_command_start(self.pos) && tok.line == line => {
                    targets.push((tok, w));
                    self.pos += 1;
                }
                _ => break,
            }
        }
        if removal {
            self.warn(
                kw.line,
                "`attribute [-blueprint]` is not supported; skipped",
            );
            return Ok(());
        }
        let Some(spec) = spec else {
            return Ok(());
        };
        if targets.is_empty() {
            self.warn(kw.line, "`attribute [blueprint]` without a target");
        }
        let scope = self.scope();
        let end = targets
            .last()
            .map_or(self.tokens[close].end, |(t, _)| t.end);
        for (tok, w) in targets {
            let target = w
                .parse::<Name>()
                .map_err(|_| self.error(tok.line, format!("malformed target `{w}`")))?;
            self.items
                .push(ModuleItem::UpstreamAttribution(UpstreamAttribution {
                    target,
                    spec: spec.clone(),
                    scope: scope.clone(),
                    span: self.span(kw.start, end, kw.line),
                }));
        }
        Ok(())
    }

    fn parse_declaration(&mut self) -> Result<()> {
        let first = self.peek().unwrap();
        let item_start = self.pos;

        let mut docstring = None;
        if let TokenKind::DocComment(raw) = &first.kind {
            if !self.at(self.pos + 1).is_some_and(is_decl_start) {
                self.warn(
                    first.line,
                    "docstring not followed by a declaration; skipped",
                );
                self.pos += 1;
                return Ok(());
            }
            docstring = Some(docstring_text(raw));
            self.pos += 1;
        }

        let mut spec: Option<AttributeSpec> = None;
        let mut others = Vec::new();
        let mut attr_list_close = None;
        while self.peek().is_some_and(|t| t.is_symbol("@[")) {
            let open = self.pos;
            let close = self.matching_bracket(open)?;
            let (s, o, _) = self.attribute_entries(open + 1, close)?;
            if let Some(s) = s {
                if spec.is_some() {
                    return Err(self.error(self.tokens[open].line, "`blueprint` listed twice"));
                }
                spec = Some(s);
            }
            others.extend(o);
            attr_list_close = Some(self.tokens[close].start);
            self.pos = close + 1;
        }

        let keyword_start = match self.peek() {
            Some(t) => t.start,
            None => {
                self.warn(first.line, "attributes at end of file; skipped");
                return Ok(());
            }
        };
        while self
            .peek()
            .and_then(Token::ident)
            .is_some_and(|w| MODIFIERS.contains(&w))
        {
            self.pos += 1;
        }
        let Some(kw_tok) = self.peek() else {
            self.warn(first.line, "modifiers at end of file; skipped");
            return Ok(());
        };
        let Some(kind) = kw_tok.ident().and_then(DeclKind::from_keyword) else {
            let text = &self.src[kw_tok.start..kw_tok.end];
            self.warn(
                kw_tok.line,
                format!("expected a declaration keyword, found `{text}`; skipped"),
            );
            if self.pos == item_start {
                self.skip_to_next_command();
            }
            return Ok(());
        };
        self.pos += 1;

        let declared = match self.peek() {
            Some(t) if t.ident().is_some() => {
                let w = t.ident().unwrap();
                self.pos += 1;
                w.parse::<Name>()
                    .map_err(|_| self.error(t.line, format!("malformed name `{w}`")))?
            }
            _ if kind == DeclKind::Instance => Name::atom(&format!("instance_{}", kw_tok.line)),
            _ => {
                self.warn(
                    kw_tok.line,
                    format!("`{}` without a name; skipped", kind.keyword()),
                );
                self.pos = item_start;
                self.skip_to_next_command();
                return Ok(());
            }
        };
        let name = qualify(self.current_namespace(), declared);

        let rest_start = self.pos;
        let mut end = rest_start;
        while end < self.tokens.len() && !self.is_command_start(end) {
            end += 1;
        }
        self.pos = end;
        let last_end = if end > rest_start {
            self.tokens[end - 1].end
        } else {
            kw_tok.end
        };

        let split = if kind.is_type_former() || kind == DeclKind::Axiom {
            None
        } else {
            self.find_value_start(rest_start, end)
        };
        let (sig_range, body_range) = match split {
            Some((sig_end, body_start)) => (
                (rest_start, sig_end),
                (body_start < end).then_some((body_start, end)),
            ),
            None => ((rest_start, end), None),
        };
        if kind.is_theorem() && body_range.is_none() {
            self.warn(kw_tok.line, format!("theorem `{name}` has no proof"));
        }

        let text_of = |(a, b): (usize, usize)| -> (usize, usize) {
            if a < b {
                (self.tokens[a].start, self.tokens[b - 1].end)
            } else {
                let at = self
                    .tokens
                    .get(a)
                    .map_or(last_end, |t| t.start.min(last_end));
                (at, at)
            }
        };
        let sig_bytes = text_of(sig_range);
        let body_bytes = body_range.map(text_of);

        let signature_sorry = self.tokens[sig_range.0..sig_range.1]
            .iter()
            .any(|t| t.is_ident("sorry") || t.is_ident("sorry_using"));

        let mut tactic_docstrings = Vec::new();
        let mut sorry_markers = Vec::new();
        if let Some((a, b)) = body_range {
            let mut in_tactics = false;
            let mut j = a;
            while j < b {
                let t = &self.tokens[j];
                match &t.kind {
                    TokenKind::Ident(w) if w == "by" => in_tactics = true,
                    TokenKind::DocComment(raw) if in_tactics => {
                        tactic_docstrings.push(docstring_text(raw))
                    }
                    TokenKind::Ident(w) if w == "sorry" => sorry_markers.push(SorryMarker {
                        span: self.span(t.start, t.end, t.line),
                        using: Vec::new(),
                    }),
                    TokenKind::Ident(w) if w == "sorry_using" => {
                        let (using, span_end, next) = self.sorry_using_list(j, b)?;
                        sorry_markers.push(SorryMarker {
                            span: self.span(t.start, span_end, t.line),
                            using,
                        });
                        j = next;
                        continue;
                    }
                    _ => {}
                }
                j += 1;
            }
        }

        let start_byte = self.tokens[item_start].start;
        let line = self.tokens[item_start].line;
        self.items.push(ModuleItem::Declaration(Declaration {
            name,
            kind,
            docstring,
            attribute: spec,
            other_attributes: others,
            signature_text: self.src[sig_bytes.0..sig_bytes.1].to_string(),
            body_text: body_bytes.map(|(a, b)| self.src[a..b].to_string()),
            tactic_docstrings,
            sorry_markers,
            signature_sorry,
            scope: self.scope(),
            layout: HeaderLayout {
                keyword_start,
                attr_list_close,
                signature: sig_bytes,
                body: body_bytes,
            },
            span: self.span(start_byte, last_end, line),
        }));
        Ok(())
    }

    /// Locates the first depth-0 `:=` (or, failing that, an equation-style
    /// `|` after the type) in `tokens[from..to]`. Returns the signature end
    /// and the body start token indices.
    fn find_value_start(&self, from: usize, to: usize) -> Option<(usize, usize)> {
        let mut depth = 0i32;
        let mut seen_colon = false;
        let mut first_bar = None;
        for j in from..to {
            let t = &self.tokens[j];
            match &t.kind {
                TokenKind::Symbol("(" | "[" | "{" | "⟨" | "@[") => depth += 1,
                TokenKind::Symbol(")" | "]" | "}" | "⟩") => depth -= 1,
                TokenKind::Symbol(":=") if depth == 0 => return Some((j, j + 1)),
                TokenKind::Symbol(":") if depth == 0 => seen_colon = true,
                TokenKind::Symbol("|") if depth == 0 && seen_colon && first_bar.is_none() => {
                    first_bar = Some(j)
                }
                _ => {}
            }
        }
        first_bar.map(|j| (j, j))
    }

    /// Parses `sorry_using [a, "b"]` starting at the keyword; returns the
    /// entries, the byte end of the marker and the next token index.
    fn sorry_using_list(
        &mut self,
        kw: usize,
        limit: usize,
    ) -> Result<(Vec<NameOrLabel>, usize, usize)> {
        let kw_tok = &self.tokens[kw];
        if !self.at(kw + 1).is_some_and(|t| t.is_symbol("[")) || kw + 1 >= limit {
            self.warn(kw_tok.line, "`sorry_using` without a `[…]` list");
            return Ok((Vec::new(), kw_tok.end, kw + 1));
        }
        let close = self.matching_bracket(kw + 1)?;
        if close >= limit {
            return Err(self.error(kw_tok.line, "`sorry_using` list is never closed"));
        }
        let mut using = Vec::new();
        for (a, b) in self.split_entries(kw + 2, close) {
            match &self.tokens[a..b] {
                [] => {}
                [t] => match &t.kind {
                    TokenKind::Ident(w) => using
                        .push(NameOrLabel::Name(w.parse::<Name>().map_err(|_| {
                            self.error(t.line, format!("malformed name `{w}`"))
                        })?)),
                    TokenKind::Str(s) => using.push(NameOrLabel::Label(s.clone())),
                    _ => return Err(self.error(t.line, "malformed `sorry_using` entry")),
                },
                [t, ..] => return Err(self.error(t.line, "malformed `sorry_using` entry")),
            }
        }
        Ok((using, self.tokens[close].end, close + 1))
    }
}

fn qualify(namespace: Option<Name>, declared: Name) -> Name {
    if declared.first() == "_root_" {
        if let Some(rest) = declared.drop_first() {
            return rest;
        }
    }
    match namespace {
        Some(ns) => ns.join(&declared),
        None => declared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MYNAT: &str = include_str!("../../tests/fixtures/mynat/Example.lean");

    fn module() -> Name {
        "Example".parse().unwrap()
    }

    fn parse(src: &str) -> ModuleUnit {
        parse_module_str(src, module()).unwrap()
    }

    fn decl<'a>(unit: &'a ModuleUnit, name: &str) -> &'a Declaration {
        unit.declarations()
            .find(|d| d.name.to_string() == name)
            .unwrap_or_else(|| panic!("no declaration {name}"))
    }

    #[test]
    fn appendix_example_declarations() {
        let unit = parse(MYNAT);
        let names: Vec<String> = unit.declarations().map(|d| d.name.to_string()).collect();
        assert_eq!(
            names,
            [
                "MyNat",
                "MyNat.add",
                "MyNat.zero_add",
                "MyNat.succ_add",
                "MyNat.add_comm"
            ]
        );
        assert_eq!(unit.imports, vec!["Architect".parse::<Name>().unwrap()]);
        assert!(unit.warnings.is_empty(), "{:?}", unit.warnings);

        let add_comm = decl(&unit, "MyNat.add_comm");
        assert_eq!(add_comm.sorry_markers.len(), 1);
        let marker = &add_comm.sorry_markers[0];
        assert_eq!(
            marker.using,
            vec![NameOrLabel::Name("succ_add".parse().unwrap())]
        );
        assert_eq!(
            &MYNAT[marker.span.byte_start..marker.span.byte_end],
            "sorry_using [succ_add]"
        );
        assert_eq!(
            add_comm.tactic_docstrings,
            [
                r"The base case follows from \cref{MyNat.zero_add}.",
                r"The inductive case follows from \cref{MyNat.succ_add}."
            ]
        );
        assert_eq!(add_comm.signature_text, "(a b : MyNat) : add a b = add b a");
        assert!(add_comm.body_text.as_deref().unwrap().starts_with("by"));
    }

    #[test]
    fn appendix_example_attributes() {
        let unit = parse(MYNAT);
        let add = decl(&unit, "MyNat.add");
        let spec = add.attribute.as_ref().unwrap();
        assert_eq!(spec.label.as_deref(), Some("def:nat-add"));
        assert_eq!(spec.statement.as_deref(), Some("Natural number addition."));
        assert_eq!(add.kind, DeclKind::Def);

        let zero_add = decl(&unit, "MyNat.zero_add");
        assert!(zero_add.has_simp_attribute());
        assert_eq!(
            zero_add.attribute.as_ref().unwrap().statement.as_deref(),
            Some("For any natural number $a$, $0 + a = a$,\nwhere $+$ is \\cref{def:nat-add}.")
        );

        let nat = decl(&unit, "MyNat");
        assert_eq!(nat.kind, DeclKind::Inductive);
        assert!(nat.body_text.is_none());
        assert_eq!(nat.attribute, Some(AttributeSpec::default()));

        let succ_add = decl(&unit, "MyNat.succ_add");
        assert_eq!(succ_add.sorry_markers.len(), 1);
        assert!(succ_add.sorry_markers[0].using.is_empty());
    }

    #[test]
    fn empty_file() {
        let unit = parse("");
        assert!(unit.items.is_empty());
        assert!(unit.imports.is_empty());
    }

    #[test]
    fn lone_blueprint_comment() {
        let unit = parse(r"blueprint_comment /-- \section{Intro} -/");
        assert_eq!(unit.items.len(), 1);
        match &unit.items[0] {
            ModuleItem::RawComment(c) => assert_eq!(c.text, r"\section{Intro}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unclosed_attribute_list_is_error() {
        let err =
            parse_module_str("@[blueprint\ntheorem foo : True := trivial", module()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn unclosed_docstring_is_error() {
        let err = parse_module_str("def x := 1\n/-- dangling", module()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_option_reports_key() {
        let err = parse_module_str("@[blueprint (bogus := 1)] def x := 1", module()).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn nested_namespaces_and_root() {
        let unit = parse(
            "namespace A\nnamespace B.C\ndef x := 1\nend B.C\ndef _root_.y := 2\ndef z := 3\nend A\ndef w := 4",
        );
        let names: Vec<String> = unit.declarations().map(|d| d.name.to_string()).collect();
        assert_eq!(names, ["A.B.C.x", "y", "A.z", "w"]);
        assert_eq!(
            decl(&unit, "A.z").scope.namespace,
            Some("A".parse().unwrap())
        );
    }

    #[test]
    fn opens_are_recorded() {
        let unit = parse("open Foo Bar\nnamespace N\nopen Baz\ndef x := 1\nend N\ndef y := 2");
        let x = decl(&unit, "N.x");
        let opens: Vec<String> = x.scope.opens.iter().map(|n| n.to_string()).collect();
        assert_eq!(opens, ["Foo", "Bar", "Baz"]);
        assert_eq!(decl(&unit, "y").scope.opens.len(), 2);
    }

    #[test]
    fn unknown_commands_warn_and_skip() {
        let unit =
            parse("variable (n : Nat)\n#check n\ndef x := 1\nfoo bar\ntheorem t : True := trivial");
        assert_eq!(unit.declarations().count(), 2);
        assert_eq!(unit.warnings.len(), 2, "{:?}", unit.warnings);
    }

    #[test]
    fn upstream_attribution() {
        let unit = parse(
            "namespace N\nattribute [simp, blueprint \"lem:refl\"] le_refl Nat.le_trans\nend N",
        );
        let attrs: Vec<&UpstreamAttribution> = unit
            .items
            .iter()
            .filter_map(|i| match i {
                ModuleItem::UpstreamAttribution(a) => Some(a),
                _ => None,
            })
            .collect();
        assert_eq!(attrs.len(), 2);
        assert_eq!(attrs[0].target.to_string(), "le_refl");
        assert_eq!(attrs[1].label(), Some("lem:refl"));
        assert_eq!(attrs[0].scope.namespace, Some("N".parse().unwrap()));
    }

    #[test]
    fn attribute_without_blueprint_is_ignored() {
        let unit = parse("attribute [simp] foo\ndef x := 1");
        assert_eq!(unit.items.len(), 1);
    }

    #[test]
    fn equation_style_body() {
        let unit = parse("def f : Nat → Nat\n  | 0 => 1\n  | n + 1 => f n");
        let f = decl(&unit, "f");
        assert_eq!(f.signature_text, ": Nat → Nat");
        assert!(f.body_text.as_deref().unwrap().starts_with("| 0"));
    }

    #[test]
    fn signature_value_split_respects_nesting() {
        let unit = parse("def f (x : Nat := 3) : Nat := x");
        let f = decl(&unit, "f");
        assert_eq!(f.signature_text, "(x : Nat := 3) : Nat");
        assert_eq!(f.body_text.as_deref(), Some("x"));
    }

    #[test]
    fn stray_docstring_warns() {
        let unit = parse("/-- lonely -/\nnamespace A\nend A");
        assert!(unit.items.is_empty());
        assert_eq!(unit.warnings.len(), 1);
    }

    #[test]
    fn anonymous_instance() {
        let unit = parse("instance : Inhabited Nat := ⟨0⟩");
        let d = unit.declarations().next().unwrap();
        assert_eq!(d.kind, DeclKind::Instance);
        assert_eq!(d.name.to_string(), "instance_1");
    }

    fn count_sorries(unit: &ModuleUnit, src: &str) -> (usize, usize) {
        let mut in_bodies = 0;
        let mut markers = 0;
        for d in unit.declarations() {
            if let Some((a, b)) = d.layout.body {
                let toks = tokenize(&src[a..b]).unwrap();
                in_bodies += toks
                    .iter()
                    .filter(|t| t.is_ident("sorry") || t.is_ident("sorry_using"))
                    .count();
            }
            markers += d.sorry_markers.len();
            for m in &d.sorry_markers {
                let (a, b) = d.layout.body.unwrap();
                assert!(a <= m.span.byte_start && m.span.byte_end <= b);
            }
        }
        (in_bodies, markers)
    }

    fn fragment() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("namespace Foo\n".to_string()),
            Just("end Foo\n".to_string()),
            Just("open Bar\n".to_string()),
            Just("theorem t1 : True := by\n  /-- step -/\n  sorry\n".to_string()),
            Just("@[simp, blueprint \"x\"] lemma t2 (a : Nat) : a = a := by sorry_using [t1, \"y\"]\n".to_string()),
            Just("/-- doc -/\ndef d (n : Nat) : Nat := n + 1\n".to_string()),
            Just("blueprint_comment /-- raw -/\n".to_string()),
            Just("attribute [blueprint] Nat.succ\n".to_string()),
            Just("junk tokens here 42 ( ) :=\n".to_string()),
            Just("variable (x : Nat)\n".to_string()),
            Just("theorem s : 1 = 1 := sorry\n".to_string()),
            "[a-z ]{0,12}\n",
        ]
    }

    proptest! {
        #[test]
        fn never_panics_on_arbitrary_text(src in "\\PC{0,200}") {
            let _ = parse_module_str(&src, module());
        }

        #[test]
        fn every_sorry_has_one_marker(parts in prop::collection::vec(fragment(), 0..12)) {
            let src = parts.concat();
            let unit = parse_module_str(&src, module()).unwrap();
            let (in_bodies, markers) = count_sorries(&unit, &src);
            prop_assert_eq!(in_bodies, markers);
        }

        #[test]
        fn reprinting_item_spans_reparses_equal(parts in prop::collection::vec(fragment(), 0..12)) {
            let src = parts.concat();
            let unit = parse_module_str(&src, module()).unwrap();
            // Without namespace commands between them, items must be
            // reprinted under their original namespace to keep their names.
            let mut printed = String::new();
            let mut last_span = None;
            for item in &unit.items {
                // Targets of one `attribute` command share its span.
                if last_span == Some(item.span()) {
                    continue;
                }
                last_span = Some(item.span());
                let ns = match item {
                    ModuleItem::Declaration(d) => d.scope.namespace.clone(),
                    ModuleItem::UpstreamAttribution(a) => a.scope.namespace.clone(),
                    ModuleItem::RawComment(_) => None,
                };
                let span = item.span();
                let text = &src[span.byte_start..span.byte_end];
                match ns {
                    Some(ns) => printed.push_str(&format!("namespace {ns}\n{text}\nend {ns}\n")),
                    None => printed.push_str(&format!("{text}\n")),
                }
            }
            let again = parse_module_str(&printed, module()).unwrap();
            let strip = |u: &ModuleUnit| -> Vec<String> {
                u.items.iter().map(|i| match i {
                    ModuleItem::Declaration(d) => format!(
                        "{}|{:?}|{:?}|{:?}|{}|{:?}|{:?}|{}",
                        d.name, d.kind, d.docstring, d.attribute, d.signature_text,
                        d.body_text, d.tactic_docstrings, d.sorry_markers.len()
                    ),
                    ModuleItem::RawComment(c) => c.text.clone(),
                    ModuleItem::UpstreamAttribution(a) => format!("{}|{:?}", a.target, a.spec),
                }).collect()
            };
            prop_assert_eq!(strip(&unit), strip(&again));
        }
    }
}
