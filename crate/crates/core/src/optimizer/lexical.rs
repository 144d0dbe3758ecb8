//! Lexical specialization: runs of character tests become `str`, choices of
//! single bytes become `cmap`, and a negated byte test followed by `.`
//! becomes the complementary `cmap`.

use super::rewrite::{apply, fixpoint, Edit, View};
use crate::charset::ByteSet;
use crate::compiler::{CodeBlock, Instruction, Label};
use crate::bytecode::MAX_STRING_LEN;

pub fn lexical_pass(block: &CodeBlock) -> CodeBlock {
    fixpoint(block, |b| {
        let v = View::new(b);
        let mut edits = Vec::new();
        let mut i = 0;
        while i < b.len() {
            match literal_run(&v, i)
                .or_else(|| byte_choice(&v, i))
                .or_else(|| negated_byte_any(&v, i))
            {
                Some(e) => {
                    i = e.start + e.len;
                    edits.push(e);
                }
                None => i += 1,
            }
        }
        (!edits.is_empty()).then(|| apply(b, edits))
    })
}

/// Bytes accepted by a single-byte test.
fn byte_test(ins: &Instruction) -> Option<ByteSet> {
    match ins {
        Instruction::Char(c) => Some(ByteSet::from_bytes([*c])),
        Instruction::Cmap(m) => Some(*m),
        _ => None,
    }
}

fn set_test(set: ByteSet) -> Instruction {
    match set.single() {
        Some(c) => Instruction::Char(c),
        None => Instruction::Cmap(set),
    }
}

/// A test followed by its failure branch: `iffail L` at `i + 1`, or nothing
/// when failure simply falls through. Returns the resolved destination, the
/// label (if any) and the total length including the test.
fn tail(v: &View, i: usize) -> (usize, Option<Label>, usize) {
    match v.iffail(i + 1) {
        Some(l) => (v.resolve_label(l), Some(l), 2),
        None => (v.resolve(i + 1), None, 1),
    }
}

fn with_branch(mut code: Vec<Instruction>, l: Option<Label>) -> Vec<Instruction> {
    code.extend(l.map(Instruction::IfFail));
    code
}

/// `char a; iffail L; char b; iffail L; ...` with one failure destination.
fn literal_run(v: &View, i: usize) -> Option<Edit> {
    let piece = |k: usize| match v.at(k)? {
        Instruction::Char(c) => Some(vec![*c]),
        Instruction::Str(s) => Some(s.clone()),
        _ => None,
    };
    let first = piece(i)?;
    let (dest, label, len) = tail(v, i);
    let label = label?;
    let mut bytes = first;
    let mut k = i + len;
    let mut pieces = 1;
    let mut bare = false;
    while v.free(k) {
        let Some(p) = piece(k) else { break };
        let (d, l, len) = tail(v, k);
        if d != dest {
            break;
        }
        bytes.extend(p);
        pieces += 1;
        k += len;
        if l.is_none() {
            bare = true;
            break;
        }
    }
    if pieces < 2 {
        return None;
    }
    let chunks: Vec<&[u8]> = bytes.chunks(MAX_STRING_LEN).collect();
    let mut with = Vec::new();
    for (n, chunk) in chunks.iter().enumerate() {
        with.push(match chunk {
            [c] => Instruction::Char(*c),
            s => Instruction::Str(s.to_vec()),
        });
        if !(bare && n + 1 == chunks.len()) {
            with.push(Instruction::IfFail(label));
        }
    }
    (with.len() < k - i).then(|| Edit::replace(i, k - i, with))
}

/// Ordered choice whose alternatives are all single-byte tests.
///
/// Each alternative but the last has the form
/// `push; T; iffail X; pop; jump E; X: peek; pop; succ`; the first may also
/// have lost its save to an enclosing `push` (`T; iffail X; jump E; X: peek;
/// succ`). The last is `T` with its failure branch. Every `E` must lead to
/// the code after the last alternative.
fn byte_choice(v: &View, i: usize) -> Option<Edit> {
    let mut set = ByteSet::new();
    let mut joins = Vec::new();
    let mut k = i;
    let mut arms = 0;
    loop {
        if arms > 0 && !v.free(k) {
            return None;
        }
        if let Some((m, e, next)) = full_arm(v, k).or_else(|| if arms == 0 { fused_arm(v, k) } else { None }) {
            set = set.union(&m);
            joins.push(e);
            k = next;
            arms += 1;
            continue;
        }
        let m = byte_test(v.at(k)?)?;
        if arms == 0 {
            return None;
        }
        set = set.union(&m);
        let (_, label, len) = tail(v, k);
        let end = k + len;
        let after = v.resolve(end);
        if joins.iter().any(|&e| e != after) {
            return None;
        }
        return Some(Edit::replace(i, end - i, with_branch(vec![set_test(set)], label)));
    }
}

/// `push; T; iffail X; pop; jump E; X: <restore-pop>; succ` returning the
/// set, the resolved `E`, and the index after the arm.
fn full_arm(v: &View, k: usize) -> Option<(ByteSet, usize, usize)> {
    if *v.at(k)? != Instruction::Push || !v.free(k + 1) {
        return None;
    }
    let m = byte_test(v.at(k + 1)?)?;
    let x = v.iffail(k + 2)?;
    if *v.at(k + 3)? != Instruction::Pop || !v.free(k + 3) || !v.free(k + 4) {
        return None;
    }
    let Instruction::Jump(e) = v.at(k + 4)? else { return None };
    let h = k + 5;
    if v.target(x) != h || v.refs[h] != 1 {
        return None;
    }
    let p = v.restore_pop(h)?;
    if *v.at(h + p)? != Instruction::Succ || !v.free(h + p) {
        return None;
    }
    Some((m, v.resolve_label(*e), h + p + 1))
}

/// First alternative whose save was merged into the preceding `push`:
/// `T; iffail X; jump E; X: peek; succ`.
fn fused_arm(v: &View, k: usize) -> Option<(ByteSet, usize, usize)> {
    if k == 0 || *v.at(k - 1)? != Instruction::Push || !v.free(k) {
        return None;
    }
    let m = byte_test(v.at(k)?)?;
    let x = v.iffail(k + 1)?;
    let Instruction::Jump(e) = v.at(k + 2)? else { return None };
    let h = k + 3;
    if !v.free(k + 2) || v.target(x) != h || v.refs[h] != 1 {
        return None;
    }
    if *v.at(h)? != Instruction::Peek || *v.at(h + 1)? != Instruction::Succ || !v.free(h + 1) {
        return None;
    }
    Some((m, v.resolve_label(*e), h + 2))
}

/// `!T .` as a single test for the complement of `T`'s set.
fn negated_byte_any(v: &View, i: usize) -> Option<Edit> {
    let (m, l, any_at) = negation_prefix(v, i)?;
    if *v.at(any_at)? != Instruction::Any || !v.free(any_at) {
        return None;
    }
    let (dest, label, len) = tail(v, any_at);
    if dest != v.resolve_label(l) {
        return None;
    }
    let end = any_at + len;
    Some(Edit::replace(i, end - i, with_branch(vec![set_test(m.complement())], label)))
}

/// The shapes of `!T` for a single-byte test `T`: returns the set, the label
/// taken when `T` matches, and the index just after the predicate.
pub(super) fn negation_prefix(v: &View, i: usize) -> Option<(ByteSet, Label, usize)> {
    // nchar c; iffail L
    if let Instruction::NChar(c) = v.at(i)? {
        let l = v.iffail(i + 1)?;
        return Some((ByteSet::from_bytes([*c]), l, i + 2));
    }
    let (test_at, full) = match v.at(i)? {
        Instruction::Push => (i + 1, true),
        _ if i > 0 && *v.at(i - 1)? == Instruction::Push && v.free(i) => (i, false),
        _ => return None,
    };
    if full && !v.free(test_at) {
        return None;
    }
    let m = byte_test(v.at(test_at)?)?;
    let (l, x, h) = negation_body(v, test_at, full)?;
    let _ = x;
    Some((m, l, h))
}

/// After a test at `t`: `iffail X; PP; fail; jump L; X: PP; succ` (with a
/// restore-pop PP), or with bare `peek`s when the save is shared with an
/// enclosing `push`. Returns `L`, `X`'s index and the index after `succ`.
pub(super) fn negation_body(v: &View, t: usize, full: bool) -> Option<(Label, usize, usize)> {
    let x = v.iffail(t + 1)?;
    let mut k = t + 2;
    let restore = |k: usize| -> Option<usize> {
        if full {
            v.restore_pop(k)
        } else {
            (*v.at(k)? == Instruction::Peek).then_some(1)
        }
    };
    if !v.free(k) {
        return None;
    }
    k += restore(k)?;
    if *v.at(k)? != Instruction::Fail || !v.free(k) || !v.free(k + 1) {
        return None;
    }
    let Instruction::Jump(l) = v.at(k + 1)? else { return None };
    let h = k + 2;
    if v.target(x) != h || v.refs[h] != 1 {
        return None;
    }
    let q = restore(h)?;
    if *v.at(h + q)? != Instruction::Succ || !v.free(h + q) {
        return None;
    }
    Some((*l, h, h + q + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{check_failure_discipline, compile_grammar, stack_depths, Opcode::*};
    use crate::grammar::parse_grammar;
    use crate::optimizer::flow_pass;

    fn block(src: &str) -> CodeBlock {
        compile_grammar(&parse_grammar(src).unwrap()).unwrap()
    }

    fn checked(b: CodeBlock) -> CodeBlock {
        stack_depths(&b).unwrap();
        check_failure_discipline(&b).unwrap();
        b
    }

    #[test]
    fn month_literal_becomes_str() {
        let out = checked(lexical_pass(&block("A = 'Jan' 'x'")));
        assert_eq!(out.instructions()[2], Instruction::Str(b"Janx".to_vec()));
        assert_eq!(out.opcodes()[2..], [Str, IfFail, Ret]);
    }

    #[test]
    fn digit_class_becomes_cmap() {
        let out = checked(lexical_pass(&block("A = [0-9]")));
        assert_eq!(&out.opcodes()[2..4], &[Cmap, IfFail]);
        assert_eq!(out.instructions()[2], Instruction::Cmap(ByteSet::from_range(b'0', b'9')));
        assert_eq!(out.target(out.instructions()[3].label().unwrap()), 4 + 9);
    }

    #[test]
    fn single_char_is_unchanged() {
        let b = block("A = 'a'");
        assert_eq!(lexical_pass(&b), b);
    }

    #[test]
    fn choice_after_flow_cleanup() {
        let out = checked(lexical_pass(&flow_pass(&block("A = 'a' / 'b' / [c-e]"))));
        assert_eq!(out.opcodes()[2..], [Cmap, Ret]);
        assert_eq!(out.instructions()[2], Instruction::Cmap(ByteSet::from_range(b'a', b'e')));
    }

    #[test]
    fn negated_class_before_any() {
        let out = checked(lexical_pass(&flow_pass(&block("A = (![,\\n] .)*"))));
        assert_eq!(out.opcodes()[2..], [Push, Cmap, IfFail, Pop, Jump, Peek, Pop, Succ, Ret]);
        assert_eq!(
            out.instructions()[3],
            Instruction::Cmap(ByteSet::from_bytes([b',', b'\n']).complement())
        );
    }

    #[test]
    fn long_literal_is_chunked() {
        let lit = "x".repeat(300);
        let out = checked(lexical_pass(&block(&format!("A = '{lit}' 'y'"))));
        assert_eq!(out.opcodes()[2..], [Str, IfFail, Str, IfFail, Ret]);
        assert_eq!(lexical_pass(&out), out);
    }
}
