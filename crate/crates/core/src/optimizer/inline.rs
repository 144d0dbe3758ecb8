//! Cost-based inlining on the grammar.

use std::collections::{HashMap, HashSet};

use crate::compiler::{compile_expression, Emitter};
use crate::grammar::{Expression, Grammar, Production};

/// Largest body (in plain instructions) inlined at every reference.
pub const INLINE_LIMIT: usize = 2;

/// Replaces references to a non-recursive production by its body when the
/// body compiles to at most [`INLINE_LIMIT`] instructions or the production
/// is referenced exactly once, then drops productions that are no longer
/// reachable from the start.
pub fn inline_pass(g: &Grammar) -> Grammar {
    let mut prods: Vec<Production> = g.productions().to_vec();
    let start = g.start().to_string();
    loop {
        let reachable = reachable(&prods, &start);
        let recursive = recursive(&prods);
        let mut uses: HashMap<&str, usize> = HashMap::new();
        for p in prods.iter().filter(|p| reachable.contains(p.name.as_str())) {
            p.body.walk(&mut |e| {
                if let Expression::NonTerminal(n) = e {
                    *uses.entry(n.as_str()).or_default() += 1;
                }
            });
        }
        let pick = prods.iter().find(|p| {
            p.name != start
                && !recursive.contains(p.name.as_str())
                && match uses.get(p.name.as_str()) {
                    Some(1) => true,
                    Some(_) => trial_size(&p.body) <= INLINE_LIMIT,
                    None => false,
                }
        });
        let Some(pick) = pick.cloned() else { break };
        for p in prods.iter_mut().filter(|p| reachable.contains(p.name.as_str())) {
            p.body = substitute(&p.body, &pick.name, &pick.body);
        }
    }
    let reachable = reachable(&prods, &start);
    prods.retain(|p| reachable.contains(p.name.as_str()));
    Grammar::with_start(prods, &start).expect("start production is kept")
}

/// Instructions the plain translation of `body` takes.
pub fn trial_size(body: &Expression) -> usize {
    let mut em = Emitter::new();
    let fail = em.new_label();
    compile_expression(body, fail, &mut em);
    em.len()
}

fn substitute(e: &Expression, name: &str, body: &Expression) -> Expression {
    let sub = |x: &Expression| substitute(x, name, body);
    let boxed = |x: &Expression| Box::new(sub(x));
    match e {
        Expression::NonTerminal(n) if n == name => body.clone(),
        Expression::Sequence(items) => Expression::Sequence(splice(items.iter().map(sub), |x| match x {
            Expression::Sequence(inner) => Ok(inner),
            other => Err(other),
        })),
        Expression::Choice(alts) => Expression::Choice(splice(alts.iter().map(sub), |x| match x {
            Expression::Choice(inner) => Ok(inner),
            other => Err(other),
        })),
        Expression::Optional(x) => Expression::Optional(boxed(x)),
        Expression::ZeroOrMore(x) => Expression::ZeroOrMore(boxed(x)),
        Expression::And(x) => Expression::And(boxed(x)),
        Expression::Not(x) => Expression::Not(boxed(x)),
        other => other.clone(),
    }
}

/// Flattens nested sequences (or choices) produced by substitution.
fn splice(
    items: impl Iterator<Item = Expression>,
    open: impl Fn(Expression) -> Result<Vec<Expression>, Expression>,
) -> Vec<Expression> {
    let mut out = Vec::new();
    for x in items {
        match open(x) {
            Ok(inner) => out.extend(inner),
            Err(x) => out.push(x),
        }
    }
    out
}

fn calls(e: &Expression) -> HashSet<String> {
    let mut out = HashSet::new();
    e.walk(&mut |x| {
        if let Expression::NonTerminal(n) = x {
            out.insert(n.clone());
        }
    });
    out
}

fn reachable(prods: &[Production], start: &str) -> HashSet<String> {
    let by_name: HashMap<&str, &Production> = prods.iter().map(|p| (p.name.as_str(), p)).collect();
    let mut seen = HashSet::new();
    let mut work = vec![start.to_string()];
    while let Some(n) = work.pop() {
        let Some(p) = by_name.get(n.as_str()) else { continue };
        if seen.insert(p.name.clone()) {
            work.extend(calls(&p.body));
        }
    }
    seen
}

/// Productions on a cycle of the reference graph.
fn recursive(prods: &[Production]) -> HashSet<&str> {
    let edges: HashMap<&str, HashSet<String>> =
        prods.iter().map(|p| (p.name.as_str(), calls(&p.body))).collect();
    prods
        .iter()
        .filter(|p| {
            let mut seen = HashSet::new();
            let mut work: Vec<&str> = edges[p.name.as_str()].iter().map(String::as_str).collect();
            while let Some(n) = work.pop() {
                if n == p.name {
                    return true;
                }
                if seen.insert(n) {
                    if let Some(next) = edges.get(n) {
                        work.extend(next.iter().map(String::as_str));
                    }
                }
            }
            false
        })
        .map(|p| p.name.as_str())
        .collect()
}
