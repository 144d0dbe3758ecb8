//! `peek; pop` becomes `peekpop` unless the `pop` is a branch target.

use super::rewrite::{apply, Edit, View};
use crate::compiler::{CodeBlock, Instruction};

pub fn peephole_pass(block: &CodeBlock) -> CodeBlock {
    let v = View::new(block);
    let mut edits = Vec::new();
    let mut i = 0;
    while i + 1 < block.len() {
        if let Some(2) = v.restore_pop(i) {
            edits.push(Edit::replace(i, 2, vec![Instruction::PeekPop]));
            i += 2;
        } else {
            i += 1;
        }
    }
    apply(block, edits)
}
