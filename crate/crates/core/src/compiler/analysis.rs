//! Static checks over a [`CodeBlock`]: backtrack-stack balance and the
//! failure discipline (nothing consumes input while the result flag says
//! failure).

use super::{CodeBlock, Instruction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("instruction {index} pops an empty backtrack stack")]
    Underflow { index: usize },
    #[error("instruction {index} is reached with stack depths {a} and {b}")]
    DepthMismatch { index: usize, a: usize, b: usize },
    #[error("ret at {index} leaves {depth} entries on the backtrack stack")]
    UnbalancedReturn { index: usize, depth: usize },
    #[error("control falls off the end of its production after instruction {index}")]
    FallsOffEnd { index: usize },
    #[error("branch at {index} leaves its production")]
    CrossesProduction { index: usize },
    #[error("instruction {index} may run while the result flag is failure")]
    FailureDiscipline { index: usize },
}

/// Control-flow successors of instruction `i` (excluding returns from calls).
pub(crate) fn successors(block: &CodeBlock, i: usize) -> [Option<usize>; 2] {
    let next = Some(i + 1);
    match &block.code[i] {
        Instruction::Jump(l) => [Some(block.target(*l)), None],
        Instruction::IfFail(l) => [next, Some(block.target(*l))],
        Instruction::Ret | Instruction::Exit => [None, None],
        _ => [next, None],
    }
}

/// Region id of every instruction: 0 for the prologue, `k + 1` for the
/// `k`-th production in layout order.
fn regions(block: &CodeBlock) -> Vec<usize> {
    let mut region = vec![0; block.len()];
    for (k, (_, range)) in block.production_ranges().into_iter().enumerate() {
        for r in &mut region[range] {
            *r = k + 1;
        }
    }
    region
}

fn roots(block: &CodeBlock) -> Vec<usize> {
    let mut roots = vec![0];
    roots.extend(block.entries.iter().map(|(_, l)| block.target(*l)));
    roots.retain(|&r| r < block.len());
    roots
}

/// Backtrack-stack depth before each instruction, or `None` where the
/// instruction is unreachable. Every production must return with the depth
/// it was entered with.
pub fn stack_depths(block: &CodeBlock) -> Result<Vec<Option<usize>>, CheckError> {
    let n = block.len();
    let region = regions(block);
    let mut depth: Vec<Option<usize>> = vec![None; n];
    let mut work = Vec::new();
    for r in roots(block) {
        depth[r] = Some(0);
        work.push(r);
    }
    while let Some(i) = work.pop() {
        let d = depth[i].expect("queued instructions have a depth");
        let out = match &block.code[i] {
            Instruction::Push => d + 1,
            Instruction::Pop | Instruction::PeekPop | Instruction::Peek if d == 0 => {
                return Err(CheckError::Underflow { index: i });
            }
            Instruction::Pop | Instruction::PeekPop => d - 1,
            Instruction::Ret if d != 0 => {
                return Err(CheckError::UnbalancedReturn { index: i, depth: d });
            }
            _ => d,
        };
        for s in successors(block, i).into_iter().flatten() {
            if s >= n || region[s] != region[i] {
                let falls = s == i + 1 && !matches!(block.code[i], Instruction::Jump(_));
                return Err(if falls {
                    CheckError::FallsOffEnd { index: i }
                } else {
                    CheckError::CrossesProduction { index: i }
                });
            }
            match depth[s] {
                None => {
                    depth[s] = Some(out);
                    work.push(s);
                }
                Some(prev) if prev != out => {
                    return Err(CheckError::DepthMismatch {
                        index: s,
                        a: prev,
                        b: out,
                    });
                }
                Some(_) => {}
            }
        }
    }
    Ok(depth)
}

const SUCC: u8 = 1;
const FAIL: u8 = 2;

/// Possible result-flag values before each instruction, as a bit set of
/// success (1) and failure (2); 0 where unreachable.
pub(crate) fn flag_states(block: &CodeBlock) -> Vec<u8> {
    let n = block.len();
    let mut state = vec![0u8; n];
    let mut work = Vec::new();
    for r in roots(block) {
        state[r] |= SUCC;
        work.push(r);
    }
    while let Some(i) = work.pop() {
        let st = state[i];
        let mut flow = |s: usize, v: u8, work: &mut Vec<usize>| {
            if v != 0 && s < n && state[s] | v != state[s] {
                state[s] |= v;
                work.push(s);
            }
        };
        match &block.code[i] {
            Instruction::Succ => flow(i + 1, SUCC, &mut work),
            Instruction::Fail => flow(i + 1, FAIL, &mut work),
            Instruction::OStr(_) | Instruction::OCmap(_) | Instruction::RCmap(_) => {
                flow(i + 1, SUCC, &mut work)
            }
            Instruction::Char(_)
            | Instruction::Any
            | Instruction::Str(_)
            | Instruction::Cmap(_)
            | Instruction::NChar(_)
            | Instruction::NStr(_)
            | Instruction::Call(_) => flow(i + 1, SUCC | FAIL, &mut work),
            Instruction::Jump(l) => flow(block.target(*l), st, &mut work),
            Instruction::IfFail(l) => {
                flow(block.target(*l), st & FAIL, &mut work);
                flow(i + 1, st & SUCC, &mut work);
            }
            Instruction::Ret | Instruction::Exit => {}
            _ => flow(i + 1, st, &mut work),
        }
    }
    state
}

/// Checks that no input-testing instruction or call can execute while the
/// result flag is failure.
pub fn check_failure_discipline(block: &CodeBlock) -> Result<(), CheckError> {
    let state = flag_states(block);
    for (i, ins) in block.code.iter().enumerate() {
        if state[i] & FAIL != 0 && ins.opcode().requires_success() {
            return Err(CheckError::FailureDiscipline { index: i });
        }
    }
    Ok(())
}
