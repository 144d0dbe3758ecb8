//! Unary specialization of `!`, `?` and `*` around one lexical test:
//! `nchar`, `nstr`, `ostr`, `ocmap` and `rcmap`. Other combinations
//! (`!cmap`, `&x`, `'c'?`, `'c'*`, `'str'*`) keep their generic code.

use super::lexical::negation_body;
use super::rewrite::{apply, fixpoint, Edit, View};
use crate::compiler::{CodeBlock, Instruction};

pub fn unary_pass(block: &CodeBlock) -> CodeBlock {
    fixpoint(block, |b| {
        let v = View::new(b);
        let mut edits = Vec::new();
        let mut i = 0;
        while i < b.len() {
            match negation(&v, i).or_else(|| option(&v, i)).or_else(|| repetition(&v, i)) {
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

/// Start of a save-guarded region at `i`: `push` then the test, or the test
/// alone when the save is shared with a `push` just before it.
fn guarded(v: &View, i: usize) -> Option<(usize, bool)> {
    match v.at(i)? {
        Instruction::Push if v.free(i + 1) => Some((i + 1, true)),
        _ if i > 0 && *v.at(i - 1)? == Instruction::Push && v.free(i) => Some((i, false)),
        _ => None,
    }
}

/// `!'c'` and `!'str'`.
fn negation(v: &View, i: usize) -> Option<Edit> {
    let (t, full) = guarded(v, i)?;
    let test = match v.at(t)? {
        Instruction::Char(c) => Instruction::NChar(*c),
        Instruction::Str(s) => Instruction::NStr(s.clone()),
        _ => return None,
    };
    let (l, _, end) = negation_body(v, t, full)?;
    Some(Edit::replace(i, end - i, vec![test, Instruction::IfFail(l)]))
}

/// `'str'?` and `[set]?`: `push; T; iffail X; pop; jump E; X: PP; succ`
/// with `E` right after the `succ`, or `T; iffail X; jump E; X: peek; succ`
/// under a shared save.
fn option(v: &View, i: usize) -> Option<Edit> {
    let (t, full) = guarded(v, i)?;
    let test = match v.at(t)? {
        Instruction::Str(s) => Instruction::OStr(s.clone()),
        Instruction::Cmap(m) => Instruction::OCmap(*m),
        _ => return None,
    };
    let x = v.iffail(t + 1)?;
    let mut k = t + 2;
    if full {
        if *v.at(k)? != Instruction::Pop || !v.free(k) {
            return None;
        }
        k += 1;
    }
    let Instruction::Jump(e) = v.at(k)? else { return None };
    let h = k + 1;
    if !v.free(k) || v.target(x) != h || v.refs[h] != 1 {
        return None;
    }
    let q = if full {
        v.restore_pop(h)?
    } else {
        (*v.at(h)? == Instruction::Peek).then_some(1)?
    };
    let end = h + q + 1;
    if *v.at(h + q)? != Instruction::Succ || !v.free(h + q) || v.resolve_label(*e) != v.resolve(end) {
        return None;
    }
    Some(Edit::replace(i, end - i, vec![test]))
}

/// `[set]*`: `L: push; cmap; iffail X; pop; jump L; X: PP; succ`.
fn repetition(v: &View, i: usize) -> Option<Edit> {
    if *v.at(i)? != Instruction::Push || !v.all_free(i + 1..i + 5) {
        return None;
    }
    let Instruction::Cmap(m) = v.at(i + 1)? else { return None };
    let x = v.iffail(i + 2)?;
    let Instruction::Jump(back) = v.at(i + 4)? else { return None };
    let h = i + 5;
    if *v.at(i + 3)? != Instruction::Pop || v.target(*back) != i || v.target(x) != h || v.refs[h] != 1 {
        return None;
    }
    let q = v.restore_pop(h)?;
    if *v.at(h + q)? != Instruction::Succ || !v.free(h + q) {
        return None;
    }
    Some(Edit::replace(i, h + q + 1 - i, vec![Instruction::RCmap(*m)]))
}
