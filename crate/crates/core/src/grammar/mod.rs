//! Parsing expressions, grammars, and the reference interpreter.
//!
//! Grammars are byte oriented: literals are byte strings and character
//! classes are 256-bit sets. `e+` is desugared by the parser into `e e*`, so
//! the AST has no one-or-more node.

mod interp;
mod parse;
mod print;
mod validate;

use std::collections::HashMap;

use crate::charset::ByteSet;

pub use interp::{interpret, interpret_with_limit, InterpretError, OracleResult, DEFAULT_DEPTH_LIMIT};
pub use parse::{parse_grammar, ParseError};
pub use validate::{validate_grammar, Diagnostic};

/// A parsing expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expression {
    Empty,
    Char(u8),
    /// Character class; never empty.
    Class(ByteSet),
    Any,
    NonTerminal(String),
    /// Byte string of length two or more (shorter literals are `Empty` or `Char`).
    Literal(Vec<u8>),
    /// Two or more expressions matched in order.
    Sequence(Vec<Expression>),
    /// Two or more alternatives tried in order.
    Choice(Vec<Expression>),
    Optional(Box<Expression>),
    ZeroOrMore(Box<Expression>),
    And(Box<Expression>),
    Not(Box<Expression>),
}

impl Expression {
    /// Builds the canonical node for a quoted byte string.
    pub fn literal(bytes: &[u8]) -> Expression {
        match bytes {
            [] => Expression::Empty,
            [b] => Expression::Char(*b),
            _ => Expression::Literal(bytes.to_vec()),
        }
    }

    pub fn nonterminal(name: impl Into<String>) -> Expression {
        Expression::NonTerminal(name.into())
    }

    /// Sequence of `items`, collapsing the zero- and one-element cases.
    pub fn sequence(mut items: Vec<Expression>) -> Expression {
        match items.len() {
            0 => Expression::Empty,
            1 => items.pop().unwrap(),
            _ => Expression::Sequence(items),
        }
    }

    /// Ordered choice of `alts`; a single alternative is returned unwrapped.
    ///
    /// Panics on an empty list: a choice needs at least one alternative.
    pub fn choice(mut alts: Vec<Expression>) -> Expression {
        assert!(!alts.is_empty(), "choice without alternatives");
        if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Expression::Choice(alts)
        }
    }

    pub fn optional(e: Expression) -> Expression {
        Expression::Optional(Box::new(e))
    }

    pub fn star(e: Expression) -> Expression {
        Expression::ZeroOrMore(Box::new(e))
    }

    /// `e+`, desugared to `e e*`.
    pub fn plus(e: Expression) -> Expression {
        Expression::Sequence(vec![e.clone(), Expression::star(e)])
    }

    pub fn and(e: Expression) -> Expression {
        Expression::And(Box::new(e))
    }

    pub fn not(e: Expression) -> Expression {
        Expression::Not(Box::new(e))
    }

    /// Direct subexpressions.
    pub fn children(&self) -> &[Expression] {
        match self {
            Expression::Sequence(v) | Expression::Choice(v) => v,
            Expression::Optional(e)
            | Expression::ZeroOrMore(e)
            | Expression::And(e)
            | Expression::Not(e) => std::slice::from_ref(e.as_ref()),
            _ => &[],
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// A named production `name = body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Production {
    pub name: String,
    pub body: Expression,
}

/// An ordered set of productions with a designated start production.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    productions: Vec<Production>,
    start: String,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("duplicate production `{0}`")]
    DuplicateProduction(String),
    #[error("grammar has no productions")]
    Empty,
    #[error("start production `{0}` is not defined")]
    UnknownStart(String),
}

impl Grammar {
    /// Builds a grammar whose start production is the first one.
    pub fn new(productions: Vec<Production>) -> Result<Grammar, GrammarError> {
        let start = productions.first().ok_or(GrammarError::Empty)?.name.clone();
        Grammar::with_start(productions, start)
    }

    pub fn with_start(
        productions: Vec<Production>,
        start: impl Into<String>,
    ) -> Result<Grammar, GrammarError> {
        if productions.is_empty() {
            return Err(GrammarError::Empty);
        }
        let mut seen = HashMap::new();
        for p in &productions {
            if seen.insert(p.name.as_str(), ()).is_some() {
                return Err(GrammarError::DuplicateProduction(p.name.clone()));
            }
        }
        let start = start.into();
        if !seen.contains_key(start.as_str()) {
            return Err(GrammarError::UnknownStart(start));
        }
        Ok(Grammar { productions, start })
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn get(&self, name: &str) -> Option<&Expression> {
        self.productions.iter().find(|p| p.name == name).map(|p| &p.body)
    }

    pub fn start_body(&self) -> &Expression {
        self.get(&self.start).expect("start production exists")
    }

    pub fn len(&self) -> usize {
        self.productions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.productions.is_empty()
    }

    /// Canonical source text; `parse_grammar(&g.to_source())` yields `g` again
    /// when the start production is the first one.
    pub fn to_source(&self) -> String {
        print::grammar_to_source(self)
    }
}

impl std::fmt::Display for Expression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print::expression_to_source(self))
    }
}

impl std::fmt::Display for Grammar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_source())
    }
}
