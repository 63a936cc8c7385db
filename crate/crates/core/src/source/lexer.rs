//! Tokenizer for the MiniLean surface syntax.
//!
//! Comments are dropped; docstrings (`/-- … -/`) survive as tokens because
//! both declaration docstrings and tactic docstrings carry blueprint text.

use crate::name::{is_ident_rest, is_ident_start};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    /// Possibly dotted identifier, e.g. `b.zero_add`.
    Ident(String),
    /// Interior of a `/-- … -/` docstring, untrimmed.
    DocComment(String),
    /// Unescaped contents of a string literal.
    Str(String),
    Number(String),
    Char,
    /// Punctuation; multi-character only for `:=`, `=>` and `@[`.
    Symbol(&'static str),
    /// Any other single character.
    Other(char),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
    pub line: usize,
}

impl Token {
    pub fn is_symbol(&self, s: &str) -> bool {
        matches!(self.kind, TokenKind::Symbol(sym) if sym == s)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_ident(&self, s: &str) -> bool {
        self.ident() == Some(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub offset: usize,
    pub message: String,
}

const SYMBOLS: &[&str] = &[
    ":=", "=>", "@[", "(", ")", "[", "]", "{", "}", "⟨", "⟩", ",", "|", ":", ";",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(src).run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            tokens: Vec::new(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize) {
        self.tokens.push(Token {
            kind,
            start,
            end: self.pos,
            line,
        });
    }

    fn error(&self, line: usize, offset: usize, message: impl Into<String>) -> LexError {
        LexError {
            line,
            offset,
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            let line = self.line;
            if c.is_whitespace() {
                self.bump();
            } else if self.rest().starts_with("--") {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if self.rest().starts_with("/--") && !self.rest().starts_with("/--/") {
                self.pos += 3;
                let body_start = self.pos;
                let body_end = self.block_body(start, line, "docstring")?;
                let text = self.src[body_start..body_end].to_string();
                self.push(TokenKind::DocComment(text), start, line);
            } else if self.rest().starts_with("/-") {
                self.pos += 2;
                self.block_body(start, line, "block comment")?;
            } else if c == '"' {
                let text = self.string(start, line)?;
                self.push(TokenKind::Str(text), start, line);
            } else if is_ident_start(c) {
                let text = self.ident();
                self.push(TokenKind::Ident(text), start, line);
            } else if c.is_ascii_digit() {
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric()
                        || (c == '.' && self.peek_nth(1).is_some_and(|d| d.is_ascii_digit()))
                    {
                        self.bump();
                    } else {
                        break;
                    }
                }
                let text = self.src[start..self.pos].to_string();
                self.push(TokenKind::Number(text), start, line);
            } else if c == '\'' && self.peek_nth(2) == Some('\'') && self.peek_nth(1) != Some('\\')
            {
                self.bump();
                self.bump();
                self.bump();
                self.push(TokenKind::Char, start, line);
            } else if let Some(sym) = SYMBOLS.iter().find(|s| self.rest().starts_with(**s)) {
                self.pos += sym.len();
                self.push(TokenKind::Symbol(sym), start, line);
            } else {
                self.bump();
                self.push(TokenKind::Other(c), start, line);
            }
        }
        Ok(self.tokens)
    }

    /// Consumes a (nestable) comment body after its opening delimiter and
    /// returns the byte offset where the closing `-/` starts.
    fn block_body(&mut self, start: usize, line: usize, what: &str) -> Result<usize, LexError> {
        let mut depth = 1usize;
        loop {
            let rest = self.rest();
            if rest.is_empty() {
                return Err(self.error(line, start, format!("unterminated {what}")));
            }
            if rest.starts_with("-/") {
                depth -= 1;
                let close = self.pos;
                self.pos += 2;
                if depth == 0 {
                    return Ok(close);
                }
            } else if rest.starts_with("/-") {
                depth += 1;
                self.pos += 2;
            } else {
                self.bump();
            }
        }
    }

    fn string(&mut self, start: usize, line: usize) -> Result<String, LexError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(line, start, "unterminated string literal")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some(c) => out.push(c),
                    None => return Err(self.error(line, start, "unterminated string literal")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        loop {
            self.bump();
            while self.peek().is_some_and(is_ident_rest) {
                self.bump();
            }
            if self.peek() == Some('.') && self.peek_nth(1).is_some_and(is_ident_start) {
                self.bump();
                continue;
            }
            break;
        }
        self.src[start..self.pos].to_string()
    }
}
