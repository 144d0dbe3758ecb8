//! Direct recursive interpreter for parsing expressions.
//!
//! This is the reference semantics the compiled bytecode is checked against.
//! It shares no code with the compiler or the VM.

use std::collections::HashMap;

use super::{Expression, Grammar};

pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub matched: bool,
    /// End position on success; the start position on failure.
    pub end_pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpretError {
    #[error("recursion depth limit of {0} exceeded")]
    DepthLimit(usize),
    #[error("reference to undefined production `{0}`")]
    Unresolved(String),
    #[error("start position {pos} is past the end of the input ({len} bytes)")]
    StartOutOfRange { pos: usize, len: usize },
}

/// Matches the start production of `g` against `input` at `start_pos`.
pub fn interpret(g: &Grammar, input: &[u8], start_pos: usize) -> Result<OracleResult, InterpretError> {
    interpret_with_limit(g, input, start_pos, DEFAULT_DEPTH_LIMIT)
}

/// As [`interpret`], with an explicit bound on evaluation nesting depth.
pub fn interpret_with_limit(
    g: &Grammar,
    input: &[u8],
    start_pos: usize,
    depth_limit: usize,
) -> Result<OracleResult, InterpretError> {
    if start_pos > input.len() {
        return Err(InterpretError::StartOutOfRange {
            pos: start_pos,
            len: input.len(),
        });
    }
    let mut it = Interpreter {
        rules: g.productions().iter().map(|p| (p.name.as_str(), &p.body)).collect(),
        input,
        depth: 0,
        limit: depth_limit,
    };
    Ok(match it.eval(g.start_body(), start_pos)? {
        Some(end) => OracleResult {
            matched: true,
            end_pos: end,
        },
        None => OracleResult {
            matched: false,
            end_pos: start_pos,
        },
    })
}

struct Interpreter<'g, 'i> {
    rules: HashMap<&'g str, &'g Expression>,
    input: &'i [u8],
    depth: usize,
    limit: usize,
}

impl Interpreter<'_, '_> {
    /// `Some(end)` on success, `None` on failure.
    fn eval(&mut self, e: &Expression, pos: usize) -> Result<Option<usize>, InterpretError> {
        self.depth += 1;
        if self.depth > self.limit {
            return Err(InterpretError::DepthLimit(self.limit));
        }
        let r = self.eval_inner(e, pos);
        self.depth -= 1;
        r
    }

    fn eval_inner(&mut self, e: &Expression, pos: usize) -> Result<Option<usize>, InterpretError> {
        let input = self.input;
        Ok(match e {
            Expression::Empty => Some(pos),
            Expression::Char(c) => (input.get(pos) == Some(c)).then_some(pos + 1),
            Expression::Class(set) => input.get(pos).filter(|&&b| set.contains(b)).map(|_| pos + 1),
            Expression::Any => (pos < input.len()).then_some(pos + 1),
            Expression::Literal(s) => input[pos..].starts_with(s).then_some(pos + s.len()),
            Expression::NonTerminal(name) => {
                let body = *self
                    .rules
                    .get(name.as_str())
                    .ok_or_else(|| InterpretError::Unresolved(name.clone()))?;
                self.eval(body, pos)?
            }
            Expression::Sequence(items) => {
                let mut cur = pos;
                for item in items {
                    match self.eval(item, cur)? {
                        Some(next) => cur = next,
                        None => return Ok(None),
                    }
                }
                Some(cur)
            }
            Expression::Choice(alts) => {
                for alt in alts {
                    if let Some(end) = self.eval(alt, pos)? {
                        return Ok(Some(end));
                    }
                }
                None
            }
            Expression::Optional(inner) => Some(self.eval(inner, pos)?.unwrap_or(pos)),
            Expression::ZeroOrMore(inner) => {
                let mut cur = pos;
                while let Some(next) = self.eval(inner, cur)? {
                    if next == cur {
                        // nullable body: validation rejects these, but never spin
                        break;
                    }
                    cur = next;
                }
                Some(cur)
            }
            Expression::And(inner) => self.eval(inner, pos)?.map(|_| pos),
            Expression::Not(inner) => match self.eval(inner, pos)? {
                Some(_) => None,
                None => Some(pos),
            },
        })
    }
}
