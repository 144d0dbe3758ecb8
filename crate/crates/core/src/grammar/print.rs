//! Canonical grammar serializer (inverse of the parser).

use super::{Expression, Grammar};
use crate::charset::push_escaped_byte;

pub(super) fn grammar_to_source(g: &Grammar) -> String {
    let mut out = String::new();
    for p in g.productions() {
        out.push_str(&p.name);
        out.push_str(" = ");
        write_expr(&mut out, &p.body, 0);
        out.push('\n');
    }
    out
}

pub(super) fn expression_to_source(e: &Expression) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn precedence(e: &Expression) -> u8 {
    match e {
        Expression::Choice(_) => 1,
        Expression::Sequence(_) => 2,
        Expression::And(_) | Expression::Not(_) => 3,
        Expression::Optional(_) | Expression::ZeroOrMore(_) => 4,
        _ => 5,
    }
}

/// Writes `e`, parenthesized if it binds looser than `min`.
fn write_expr(out: &mut String, e: &Expression, min: u8) {
    if precedence(e) < min {
        out.push('(');
        write_expr(out, e, 0);
        out.push(')');
        return;
    }
    match e {
        Expression::Empty => out.push_str("''"),
        Expression::Char(c) => write_quoted(out, std::slice::from_ref(c)),
        Expression::Literal(s) => write_quoted(out, s),
        Expression::Class(set) => out.push_str(&set.to_positive_class_string()),
        Expression::Any => out.push('.'),
        Expression::NonTerminal(name) => out.push_str(name),
        Expression::Sequence(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_expr(out, item, 3);
            }
        }
        Expression::Choice(alts) => {
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" / ");
                }
                write_expr(out, alt, 2);
            }
        }
        Expression::Optional(inner) => {
            write_expr(out, inner, 4);
            out.push('?');
        }
        Expression::ZeroOrMore(inner) => {
            write_expr(out, inner, 4);
            out.push('*');
        }
        Expression::And(inner) => {
            out.push('&');
            write_expr(out, inner, 3);
        }
        Expression::Not(inner) => {
            out.push('!');
            write_expr(out, inner, 3);
        }
    }
}

fn write_quoted(out: &mut String, bytes: &[u8]) {
    out.push('\'');
    for &b in bytes {
        match b {
            b'\'' => out.push_str("\\'"),
            b'\\' => out.push_str("\\\\"),
            _ => push_escaped_byte(out, b),
        }
    }
    out.push('\'');
}
