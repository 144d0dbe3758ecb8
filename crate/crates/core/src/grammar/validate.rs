//! Well-formedness checks: unresolved references, left recursion, and
//! repetitions whose body can succeed without consuming input.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{Expression, Grammar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// `name` is referenced from `production` but never defined.
    Unresolved { name: String, production: String },
    /// A cycle of productions reachable without consuming input; the first
    /// and last entries are the same production.
    LeftRecursion { cycle: Vec<String> },
    /// `expr` is a repetition in `production` whose body is nullable.
    NullableRepetition { production: String, expr: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Unresolved { name, production } => {
                write!(f, "UNRESOLVED({name}) in production `{production}`")
            }
            Diagnostic::LeftRecursion { cycle } => {
                write!(f, "LEFT_RECURSION({})", cycle.join("->"))
            }
            Diagnostic::NullableRepetition { production, expr } => {
                write!(f, "NULLABLE_REPETITION({production}, {expr})")
            }
        }
    }
}

/// Returns every problem that would prevent `g` from compiling into a
/// terminating program. An empty list means the grammar is compilable.
pub fn validate_grammar(g: &Grammar) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let index: HashMap<&str, usize> = g
        .productions()
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();

    for p in g.productions() {
        let mut seen = BTreeSet::new();
        p.body.walk(&mut |e| {
            if let Expression::NonTerminal(name) = e {
                if !index.contains_key(name.as_str()) && seen.insert(name.clone()) {
                    diags.push(Diagnostic::Unresolved {
                        name: name.clone(),
                        production: p.name.clone(),
                    });
                }
            }
        });
    }

    let nullable = nullable_productions(g, &index);
    let is_nullable = |e: &Expression| expr_nullable(e, &nullable, &index);

    // edges A -> B when B can be entered at A's starting position
    let edges: Vec<BTreeSet<usize>> = g
        .productions()
        .iter()
        .map(|p| {
            let mut out = BTreeSet::new();
            first_calls(&p.body, &is_nullable, &index, &mut out);
            out
        })
        .collect();
    for cycle in left_recursive_cycles(&edges) {
        diags.push(Diagnostic::LeftRecursion {
            cycle: cycle
                .into_iter()
                .map(|i| g.productions()[i].name.clone())
                .collect(),
        });
    }

    for p in g.productions() {
        p.body.walk(&mut |e| {
            if let Expression::ZeroOrMore(inner) = e {
                if is_nullable(inner) {
                    diags.push(Diagnostic::NullableRepetition {
                        production: p.name.clone(),
                        expr: e.to_string(),
                    });
                }
            }
        });
    }
    diags
}

/// Productions that can succeed without consuming input (least fixpoint).
pub(crate) fn nullable_productions(g: &Grammar, index: &HashMap<&str, usize>) -> Vec<bool> {
    let mut nullable = vec![false; g.len()];
    loop {
        let mut changed = false;
        for (i, p) in g.productions().iter().enumerate() {
            if !nullable[i] && expr_nullable(&p.body, &nullable, index) {
                nullable[i] = true;
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

pub(crate) fn expr_nullable(e: &Expression, nullable: &[bool], index: &HashMap<&str, usize>) -> bool {
    match e {
        Expression::Empty => true,
        Expression::Char(_) | Expression::Class(_) | Expression::Any | Expression::Literal(_) => false,
        Expression::NonTerminal(n) => index.get(n.as_str()).is_some_and(|&i| nullable[i]),
        Expression::Sequence(items) => items.iter().all(|x| expr_nullable(x, nullable, index)),
        Expression::Choice(alts) => alts.iter().any(|x| expr_nullable(x, nullable, index)),
        Expression::Optional(_) | Expression::ZeroOrMore(_) | Expression::And(_) | Expression::Not(_) => true,
    }
}

fn first_calls(
    e: &Expression,
    is_nullable: &impl Fn(&Expression) -> bool,
    index: &HashMap<&str, usize>,
    out: &mut BTreeSet<usize>,
) {
    match e {
        Expression::NonTerminal(n) => {
            if let Some(&i) = index.get(n.as_str()) {
                out.insert(i);
            }
        }
        Expression::Sequence(items) => {
            for item in items {
                first_calls(item, is_nullable, index, out);
                if !is_nullable(item) {
                    break;
                }
            }
        }
        Expression::Choice(alts) => {
            for alt in alts {
                first_calls(alt, is_nullable, index, out);
            }
        }
        Expression::Optional(inner)
        | Expression::ZeroOrMore(inner)
        | Expression::And(inner)
        | Expression::Not(inner) => first_calls(inner, is_nullable, index, out),
        _ => {}
    }
}

/// One representative cycle per strongly connected component that contains a
/// cycle, each starting (and ending) at the component's earliest production.
fn left_recursive_cycles(edges: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let sccs = strongly_connected(edges);
    let mut cycles = Vec::new();
    for scc in sccs {
        let first = *scc.iter().min().unwrap();
        let members: BTreeSet<usize> = scc.into_iter().collect();
        if members.len() == 1 && !edges[first].contains(&first) {
            continue;
        }
        // breadth-first search back to `first`, staying inside the component
        let mut parent: HashMap<usize, usize> = HashMap::new();
        let mut queue = std::collections::VecDeque::from([first]);
        let mut found = None;
        'search: while let Some(u) = queue.pop_front() {
            for &v in &edges[u] {
                if !members.contains(&v) {
                    continue;
                }
                if v == first {
                    found = Some(u);
                    break 'search;
                }
                if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(v) {
                    slot.insert(u);
                    queue.push_back(v);
                }
            }
        }
        let mut back = Vec::new();
        let mut cur = found.expect("component has a cycle");
        while cur != first {
            back.push(cur);
            cur = parent[&cur];
        }
        let mut cycle = vec![first];
        cycle.extend(back.into_iter().rev());
        cycle.push(first);
        cycles.push(cycle);
    }
    cycles.sort();
    cycles
}

/// Tarjan's algorithm, iterative.
fn strongly_connected(edges: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, Vec<usize>)> = vec![(root, edges[root].iter().copied().collect())];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, pending)) = work.last_mut() {
            let v = *v;
            if let Some(w) = pending.pop() {
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, edges[w].iter().copied().collect()));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some((parent, _)) = work.last() {
                    low[*parent] = low[*parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
    }
    out
}
