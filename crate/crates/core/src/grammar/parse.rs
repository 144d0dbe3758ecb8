//! Grammar source parser.
//!
//! ```text
//! Grammar    <- Spacing Definition+ EOF
//! Definition <- Identifier '=' Choice
//! Choice     <- Sequence ('/' Sequence)*
//! Sequence   <- Prefix+
//! Prefix     <- ('&' / '!')* Suffix
//! Suffix     <- Primary ('?' / '*' / '+')*
//! Primary    <- Identifier !'=' / '(' Choice ')' / Literal / Class / '.'
//! ```
//!
//! Literals are quoted with `'` or `"`. Escapes in literals and classes:
//! `\n \r \t \\ \' \" \[ \] \- \^ \xHH`. Comments run from `#` to end of line.

use super::{Expression, Grammar, GrammarError, Production};
use crate::charset::ByteSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: duplicate production `{name}`")]
    DuplicateProduction {
        line: usize,
        column: usize,
        name: String,
    },
}

impl ParseError {
    /// 1-based line and column of the error.
    pub fn location(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::DuplicateProduction { line, column, .. } => (*line, *column),
        }
    }
}

/// Parses grammar source text. The first production is the start production.
pub fn parse_grammar(text: &str) -> Result<Grammar, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let mut productions: Vec<Production> = Vec::new();
    p.skip_spacing();
    while !p.at_end() {
        let name_pos = p.pos;
        let name = p
            .identifier()
            .ok_or_else(|| p.error("expected production name"))?;
        p.skip_spacing();
        if !p.eat(b'=') {
            return Err(p.error("expected `=` after production name"));
        }
        p.skip_spacing();
        let body = p.choice()?;
        if body.size() > MAX_EXPRESSION_NODES {
            return Err(p.error("production too large once `+` is expanded"));
        }
        if productions.iter().any(|q| q.name == name) {
            let (line, column) = p.line_col(name_pos);
            return Err(ParseError::DuplicateProduction { line, column, name });
        }
        productions.push(Production { name, body });
    }
    Grammar::new(productions).map_err(|e| match e {
        GrammarError::Empty => p.error("grammar has no productions"),
        other => p.error(&other.to_string()),
    })
}

/// Deepest nesting of groups and prefix operators accepted.
pub const MAX_NESTING: usize = 200;
/// Largest expression, in nodes, after `e+` is expanded to `e e*`.
pub const MAX_EXPRESSION_NODES: usize = 1 << 16;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn line_col(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        // columns count characters, not bytes
        let column = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
        (line, column)
    }

    fn error(&self, message: &str) -> ParseError {
        let (line, column) = self.line_col(self.pos);
        ParseError::Syntax {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn skip_spacing(&mut self) {
        while let Some(b) = self.peek() {
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn identifier(&mut self) -> Option<String> {
        let start = self.pos;
        match self.peek() {
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.pos += 1,
            _ => return None,
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    /// True when the upcoming tokens are `Identifier '='`, i.e. the start of
    /// the next definition.
    fn at_definition(&self) -> bool {
        let mut probe = Parser {
            src: self.src,
            pos: self.pos,
            depth: 0,
        };
        if probe.identifier().is_none() {
            return false;
        }
        probe.skip_spacing();
        probe.peek() == Some(b'=')
    }

    fn choice(&mut self) -> Result<Expression, ParseError> {
        let mut alts = vec![self.sequence()?];
        while self.eat(b'/') {
            self.skip_spacing();
            alts.push(self.sequence()?);
        }
        Ok(Expression::choice(alts))
    }

    fn sequence(&mut self) -> Result<Expression, ParseError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(b'/') | Some(b')') => break,
                _ if self.at_definition() => break,
                _ => items.push(self.prefix()?),
            }
        }
        if items.is_empty() {
            return Err(self.error("expected expression"));
        }
        Ok(Expression::sequence(items))
    }

    fn prefix(&mut self) -> Result<Expression, ParseError> {
        if self.depth >= MAX_NESTING {
            return Err(self.error("expression nested too deeply"));
        }
        self.depth += 1;
        let e = self.prefix_inner();
        self.depth -= 1;
        e
    }

    fn prefix_inner(&mut self) -> Result<Expression, ParseError> {
        match self.peek() {
            Some(b'&') => {
                self.pos += 1;
                self.skip_spacing();
                Ok(Expression::and(self.prefix()?))
            }
            Some(b'!') => {
                self.pos += 1;
                self.skip_spacing();
                Ok(Expression::not(self.prefix()?))
            }
            _ => self.suffix(),
        }
    }

    fn suffix(&mut self) -> Result<Expression, ParseError> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Some(b'?') => e = Expression::optional(e),
                Some(b'*') => e = Expression::star(e),
                Some(b'+') => {
                    if 2 * e.size() + 2 > MAX_EXPRESSION_NODES {
                        return Err(self.error("expression too large once `+` is expanded"));
                    }
                    e = Expression::plus(e)
                }
                _ => break,
            }
            self.pos += 1;
            self.skip_spacing();
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expression, ParseError> {
        let e = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_spacing();
                let e = self.choice()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                e
            }
            Some(q @ (b'\'' | b'"')) => {
                self.pos += 1;
                Expression::literal(&self.quoted(q)?)
            }
            Some(b'[') => {
                self.pos += 1;
                Expression::Class(self.class()?)
            }
            Some(b'.') => {
                self.pos += 1;
                Expression::Any
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                Expression::NonTerminal(self.identifier().unwrap())
            }
            Some(_) => return Err(self.error("unexpected character")),
            None => return Err(self.error("unexpected end of input")),
        };
        self.skip_spacing();
        Ok(e)
    }

    fn quoted(&mut self, quote: u8) -> Result<Vec<u8>, ParseError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None | Some(b'\n') => return Err(self.error("unterminated literal")),
                Some(b) if b == quote => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => out.push(self.escape()?),
                Some(b) => {
                    out.push(b);
                    self.pos += 1;
                }
            }
        }
    }

    fn class(&mut self) -> Result<ByteSet, ParseError> {
        let mut set = ByteSet::new();
        loop {
            let lo = match self.peek() {
                None | Some(b'\n') => return Err(self.error("unterminated character class")),
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => self.class_byte()?,
            };
            if self.peek() == Some(b'-') && self.src.get(self.pos + 1) != Some(&b']') {
                self.pos += 1;
                let hi = self.class_byte()?;
                if hi < lo {
                    return Err(self.error("reversed range in character class"));
                }
                set.insert_range(lo, hi);
            } else {
                set.insert(lo);
            }
        }
        if set.is_empty() {
            return Err(self.error("empty character class"));
        }
        Ok(set)
    }

    fn class_byte(&mut self) -> Result<u8, ParseError> {
        match self.peek() {
            Some(b'\\') => self.escape(),
            Some(b) if b < 0x80 => {
                self.pos += 1;
                Ok(b)
            }
            Some(_) => Err(self.error("non-ASCII character in class; use \\xHH")),
            None => Err(self.error("unterminated character class")),
        }
    }

    fn escape(&mut self) -> Result<u8, ParseError> {
        debug_assert_eq!(self.peek(), Some(b'\\'));
        self.pos += 1;
        let b = match self.peek() {
            Some(b'n') => b'\n',
            Some(b'r') => b'\r',
            Some(b't') => b'\t',
            Some(c @ (b'\\' | b'\'' | b'"' | b'[' | b']' | b'-' | b'^')) => c,
            Some(b'x') => {
                let hex = self
                    .src
                    .get(self.pos + 1..self.pos + 3)
                    .and_then(|h| std::str::from_utf8(h).ok())
                    .and_then(|h| u8::from_str_radix(h, 16).ok())
                    .ok_or_else(|| self.error("expected two hex digits after \\x"))?;
                self.pos += 3;
                return Ok(hex);
            }
            _ => return Err(self.error("unknown escape")),
        };
        self.pos += 1;
        Ok(b)
    }
}
