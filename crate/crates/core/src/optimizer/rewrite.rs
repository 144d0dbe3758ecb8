//! Index-mapping rewrites of a [`CodeBlock`].
//!
//! A pass collects non-overlapping [`Edit`]s against the current block and
//! [`apply`] rebuilds it. Every old index maps to the new index where its
//! replacement starts (a deleted instruction maps to whatever follows it),
//! and labels are carried through that map. Patterns must only swallow
//! instructions whose labels are referenced from inside the pattern.

use std::collections::HashMap;

use crate::compiler::{CodeBlock, Instruction, Label};

#[derive(Clone, Debug)]
pub(crate) struct Edit {
    pub start: usize,
    pub len: usize,
    pub with: Vec<Instruction>,
}

impl Edit {
    pub fn delete(at: usize) -> Edit {
        Edit {
            start: at,
            len: 1,
            with: Vec::new(),
        }
    }

    pub fn replace(start: usize, len: usize, with: Vec<Instruction>) -> Edit {
        Edit { start, len, with }
    }
}

/// Applies `edits` (in any order, non-overlapping) and renumbers labels.
pub(crate) fn apply(block: &CodeBlock, mut edits: Vec<Edit>) -> CodeBlock {
    edits.sort_by_key(|e| e.start);
    let n = block.code.len();
    let mut out = Vec::with_capacity(n);
    let mut map = vec![0usize; n + 1];
    let mut pending = edits.into_iter().peekable();
    let mut i = 0;
    while i < n {
        match pending.peek() {
            Some(e) if e.start == i => {
                let e = pending.next().expect("peeked");
                debug_assert!(e.len > 0 && i + e.len <= n);
                for m in &mut map[i..i + e.len] {
                    *m = out.len();
                }
                out.extend(e.with);
                i += e.len;
            }
            _ => {
                debug_assert!(pending.peek().is_none_or(|e| e.start > i), "overlapping edits");
                map[i] = out.len();
                out.push(block.code[i].clone());
                i += 1;
            }
        }
    }
    map[n] = out.len();
    let labels = block.labels.iter().map(|&t| map[t]).collect();
    compact(CodeBlock {
        code: out,
        labels,
        entries: block.entries.clone(),
        start: block.start.clone(),
    })
}

/// Drops labels nothing refers to and numbers the rest by first use:
/// production entries in layout order, then branch operands in code order.
pub(crate) fn compact(block: CodeBlock) -> CodeBlock {
    let mut renumber: HashMap<u32, u32> = HashMap::new();
    let mut labels = Vec::new();
    let mut fresh = |l: Label, labels: &mut Vec<usize>| {
        *renumber.entry(l.0).or_insert_with(|| {
            labels.push(block.labels[l.0 as usize]);
            labels.len() as u32 - 1
        })
    };
    let entries = block
        .entries
        .iter()
        .map(|(name, l)| (name.clone(), Label(fresh(*l, &mut labels))))
        .collect();
    let code = block
        .code
        .iter()
        .map(|ins| match ins {
            Instruction::Jump(l) => Instruction::Jump(Label(fresh(*l, &mut labels))),
            Instruction::IfFail(l) => Instruction::IfFail(Label(fresh(*l, &mut labels))),
            other => other.clone(),
        })
        .collect();
    CodeBlock {
        code,
        labels,
        entries,
        start: block.start,
    }
}

/// Index execution really continues at when control reaches `idx`: nops are
/// skipped and unconditional jumps followed.
pub(crate) fn resolve(block: &CodeBlock, mut idx: usize) -> usize {
    for _ in 0..=block.code.len() {
        match block.code.get(idx) {
            Some(Instruction::Nop) => idx += 1,
            Some(Instruction::Jump(l)) => {
                let t = block.target(*l);
                if t == idx {
                    return idx;
                }
                idx = t;
            }
            _ => return idx,
        }
    }
    idx
}

/// Resolved destination of a label.
pub(crate) fn resolve_label(block: &CodeBlock, l: Label) -> usize {
    resolve(block, block.target(l))
}

/// Runs `step` until it reports no change.
pub(crate) fn fixpoint(block: &CodeBlock, step: impl Fn(&CodeBlock) -> Option<CodeBlock>) -> CodeBlock {
    let mut cur = compact(block.clone());
    while let Some(next) = step(&cur) {
        debug_assert!(next.len() <= cur.len());
        cur = next;
    }
    cur
}

/// Shared view for pattern matchers: the block plus reference counts.
pub(crate) struct View<'a> {
    pub block: &'a CodeBlock,
    pub refs: Vec<usize>,
}

impl<'a> View<'a> {
    pub fn new(block: &'a CodeBlock) -> Self {
        View {
            block,
            refs: block.reference_counts(),
        }
    }

    pub fn at(&self, i: usize) -> Option<&'a Instruction> {
        self.block.code.get(i)
    }

    /// No label points at `i`.
    pub fn free(&self, i: usize) -> bool {
        self.refs.get(i).is_some_and(|&r| r == 0)
    }

    /// All of `range` is unlabeled.
    pub fn all_free(&self, range: std::ops::Range<usize>) -> bool {
        range.into_iter().all(|i| self.free(i))
    }

    pub fn target(&self, l: Label) -> usize {
        self.block.target(l)
    }

    pub fn resolve(&self, i: usize) -> usize {
        resolve(self.block, i)
    }

    pub fn resolve_label(&self, l: Label) -> usize {
        resolve_label(self.block, l)
    }

    /// `peekpop`, or `peek; pop` with the pop unlabeled. Returns the length.
    pub fn restore_pop(&self, i: usize) -> Option<usize> {
        match (self.at(i)?, self.at(i + 1)) {
            (Instruction::PeekPop, _) => Some(1),
            (Instruction::Peek, Some(Instruction::Pop)) if self.free(i + 1) => Some(2),
            _ => None,
        }
    }

    /// `iffail L` at `i` with `i` unlabeled.
    pub fn iffail(&self, i: usize) -> Option<Label> {
        match self.at(i)? {
            Instruction::IfFail(l) if self.free(i) => Some(*l),
            _ => None,
        }
    }
}
