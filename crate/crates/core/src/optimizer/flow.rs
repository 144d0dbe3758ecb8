//! Control-flow cleanup and removal of redundant position saves.

use std::collections::{HashSet, VecDeque};

use super::rewrite::{apply, fixpoint, Edit, View};
use crate::compiler::{stack_depths, CodeBlock, Instruction};
use crate::compiler::analysis::successors;

pub fn flow_pass(block: &CodeBlock) -> CodeBlock {
    fixpoint(block, |b| {
        drop_nops(b)
            .or_else(|| thread_jumps(b))
            .or_else(|| drop_branches_to_next(b))
            .or_else(|| drop_unreachable(b))
            .or_else(|| fuse_pushes(b))
            .or_else(|| drop_pop_push(b))
    })
}

fn edits_or_none(block: &CodeBlock, edits: Vec<Edit>) -> Option<CodeBlock> {
    (!edits.is_empty()).then(|| apply(block, edits))
}

fn drop_nops(b: &CodeBlock) -> Option<CodeBlock> {
    let edits = (0..b.len())
        .filter(|&i| b.code[i] == Instruction::Nop)
        .map(Edit::delete)
        .collect();
    edits_or_none(b, edits)
}

/// `jump` to `jump` and `iffail` to `jump`/`iffail` go straight to the end
/// of the chain.
fn thread_jumps(b: &CodeBlock) -> Option<CodeBlock> {
    let mut code = b.code.clone();
    let mut changed = false;
    for (i, ins) in b.code.iter().enumerate() {
        let Some(mut l) = ins.label() else { continue };
        let conditional = matches!(ins, Instruction::IfFail(_));
        let mut seen = HashSet::new();
        loop {
            let t = b.target(l);
            if !seen.insert(t) {
                break;
            }
            match &b.code[t] {
                Instruction::Jump(next) => l = *next,
                Instruction::IfFail(next) if conditional => l = *next,
                _ => break,
            }
        }
        if b.target(l) != b.target(ins.label().expect("branch")) {
            code[i] = if conditional {
                Instruction::IfFail(l)
            } else {
                Instruction::Jump(l)
            };
            changed = true;
        }
    }
    changed.then(|| {
        super::rewrite::compact(CodeBlock {
            code,
            ..b.clone()
        })
    })
}

/// Branches whose destination is where execution continues anyway.
fn drop_branches_to_next(b: &CodeBlock) -> Option<CodeBlock> {
    let v = View::new(b);
    let edits = (0..b.len())
        .filter(|&i| match &b.code[i] {
            Instruction::Jump(l) | Instruction::IfFail(l) => {
                let t = v.resolve_label(*l);
                t != i && t == v.resolve(i + 1)
            }
            _ => false,
        })
        .map(Edit::delete)
        .collect();
    edits_or_none(b, edits)
}

fn drop_unreachable(b: &CodeBlock) -> Option<CodeBlock> {
    let n = b.len();
    let mut seen = vec![false; n];
    let mut work: Vec<usize> = std::iter::once(0)
        .chain(b.entries.iter().map(|(_, l)| b.target(*l)))
        .filter(|&i| i < n)
        .collect();
    while let Some(i) = work.pop() {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        work.extend(successors(b, i).into_iter().flatten().filter(|&s| s < n));
    }
    let edits = (0..n).filter(|&i| !seen[i]).map(Edit::delete).collect();
    edits_or_none(b, edits)
}

/// `push; push` saves the same position twice. The inner save is dropped
/// and the code it guards, up to its closing `pop`/`peekpop`, is rewired to
/// use the outer one.
fn fuse_pushes(b: &CodeBlock) -> Option<CodeBlock> {
    let Ok(depths) = stack_depths(b) else {
        return None;
    };
    let v = View::new(b);
    let preds = predecessors(b);
    for i in 0..b.len().saturating_sub(1) {
        if b.code[i] != Instruction::Push || b.code[i + 1] != Instruction::Push || !v.free(i + 1) {
            continue;
        }
        let Some(d) = depths[i] else { continue };
        if let Some(edits) = push_region(b, &depths, &preds, i + 1, d + 2) {
            return Some(apply(b, edits));
        }
    }
    None
}

/// Edits removing the save at `inner`, or `None` if the code it guards is
/// entered from elsewhere or does not close cleanly.
fn push_region(
    b: &CodeBlock,
    depths: &[Option<usize>],
    preds: &[Vec<usize>],
    inner: usize,
    closing_depth: usize,
) -> Option<Vec<Edit>> {
    let n = b.len();
    let mut member = vec![false; n];
    let mut closers = Vec::new();
    let mut queue = VecDeque::from([inner + 1]);
    while let Some(j) = queue.pop_front() {
        if j >= n || member[j] {
            continue;
        }
        let dj = depths[j]?;
        if dj < closing_depth {
            return None;
        }
        member[j] = true;
        match &b.code[j] {
            Instruction::Pop | Instruction::PeekPop if dj == closing_depth => {
                closers.push(j);
                continue;
            }
            Instruction::Ret | Instruction::Exit => return None,
            _ => {}
        }
        queue.extend(successors(b, j).into_iter().flatten());
    }
    for j in (0..n).filter(|&j| member[j]) {
        if preds[j].iter().any(|&p| p != inner && !member[p]) {
            return None;
        }
    }
    let mut edits = vec![Edit::delete(inner)];
    for c in closers {
        edits.push(match b.code[c] {
            Instruction::Pop => Edit::delete(c),
            _ => Edit::replace(c, 1, vec![Instruction::Peek]),
        });
    }
    Some(edits)
}

/// Every control-flow predecessor of each instruction. Production entries
/// count as an outside predecessor (`usize::MAX`).
fn predecessors(b: &CodeBlock) -> Vec<Vec<usize>> {
    let n = b.len();
    let mut preds = vec![Vec::new(); n];
    for i in 0..n {
        for s in successors(b, i).into_iter().flatten() {
            if s < n {
                preds[s].push(i);
            }
        }
    }
    for (_, l) in &b.entries {
        if let Some(p) = preds.get_mut(b.target(*l)) {
            p.push(usize::MAX);
        }
    }
    preds
}

/// `pop; push` where the position already equals the popped entry (it was
/// just saved or restored from it) leaves both stack and position as they
/// were.
fn drop_pop_push(b: &CodeBlock) -> Option<CodeBlock> {
    let v = View::new(b);
    let mut edits = Vec::new();
    let mut i = 1;
    while i + 1 < b.len() {
        if b.code[i] == Instruction::Pop && b.code[i + 1] == Instruction::Push && v.all_free(i..i + 2) {
            let mut j = i - 1;
            let known = loop {
                match &b.code[j] {
                    Instruction::Peek | Instruction::Push => break true,
                    Instruction::Nop | Instruction::Succ | Instruction::Fail | Instruction::IfFail(_)
                        if j > 0 && v.free(j) =>
                    {
                        j -= 1
                    }
                    _ => break false,
                }
            };
            if known {
                edits.push(Edit::delete(i));
                edits.push(Edit::delete(i + 1));
                i += 2;
                continue;
            }
        }
        i += 1;
    }
    edits_or_none(b, edits)
}
