//! The parsing machine: one untyped word stack shared by saved positions
//! and return addresses, a position register and a one-bit result flag.

use crate::bytecode::{Inst, Program};

pub const DEFAULT_STACK_SLOTS: usize = 512;
/// Bytes per stack slot when reporting stack usage.
pub const SLOT_BYTES: usize = 4;

/// 64 steps per input byte plus a constant.
pub fn default_step_limit(input_len: usize) -> u64 {
    64 * input_len as u64 + 4096
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub stack_slots: usize,
    /// `None` selects [`default_step_limit`] for the input.
    pub step_limit: Option<u64>,
    /// Stop with [`RunError::Discipline`] when an input test or call is
    /// reached while the result flag is failure.
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stack_slots: DEFAULT_STACK_SLOTS,
            step_limit: None,
            strict: false,
        }
    }
}

impl RunConfig {
    pub fn with_stack_slots(mut self, slots: usize) -> Self {
        self.stack_slots = slots;
        self
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = Some(limit);
        self
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, thiserror::Error)]
pub enum RunError {
    #[error("STACK_OVERFLOW")]
    #[serde(rename = "STACK_OVERFLOW")]
    StackOverflow,
    #[error("STACK_UNDERFLOW")]
    #[serde(rename = "STACK_UNDERFLOW")]
    StackUnderflow,
    #[error("STEP_LIMIT")]
    #[serde(rename = "STEP_LIMIT")]
    StepLimit,
    /// Control ran past the last instruction.
    #[error("PC_OUT_OF_RANGE")]
    #[serde(rename = "PC_OUT_OF_RANGE")]
    PcOutOfRange,
    /// Strict mode only: an input test or call ran with the failure flag set.
    #[error("FAILURE_DISCIPLINE at instruction {pc}")]
    #[serde(rename = "FAILURE_DISCIPLINE")]
    Discipline { pc: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub pc: usize,
    pub pos: usize,
    /// Result flag: `true` is success.
    pub r: bool,
    pub stack: Vec<usize>,
    pub halted: bool,
}

impl MachineState {
    pub fn new(p: &Program) -> Self {
        MachineState {
            pc: p.start as usize,
            pos: 0,
            r: true,
            stack: Vec::new(),
            halted: false,
        }
    }

    pub fn sp(&self) -> usize {
        self.stack.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseResult {
    pub matched: bool,
    /// Bytes matched; 0 when the input was not matched.
    pub consumed: usize,
    /// High-water mark of the stack, in slots.
    pub max_stack_depth: usize,
    pub steps: u64,
    pub error: Option<RunError>,
}

impl ParseResult {
    pub fn max_stack_bytes(&self) -> usize {
        self.max_stack_depth * SLOT_BYTES
    }
}

/// Applies exactly one transition. `capacity` bounds the stack.
#[inline(always)]
fn exec(
    s: &mut MachineState,
    p: &Program,
    input: &[u8],
    capacity: usize,
    strict: bool,
) -> Result<(), RunError> {
    let ins = *p.code.get(s.pc).ok_or(RunError::PcOutOfRange)?;
    if strict && !s.r && ins.opcode().requires_success() {
        return Err(RunError::Discipline { pc: s.pc });
    }
    let mut next = s.pc + 1;
    match ins {
        Inst::Nop => {}
        Inst::Succ => s.r = true,
        Inst::Fail => s.r = false,
        Inst::Char(c) => {
            s.r = input.get(s.pos) == Some(&c);
            s.pos += s.r as usize;
        }
        Inst::Any => {
            s.r = s.pos < input.len();
            s.pos += s.r as usize;
        }
        Inst::Jump(t) => next = t as usize,
        Inst::IfFail(t) => {
            if !s.r {
                next = t as usize;
            }
        }
        Inst::Call(t) => {
            if s.stack.len() >= capacity {
                return Err(RunError::StackOverflow);
            }
            s.stack.push(next);
            next = t as usize;
        }
        Inst::Ret => next = s.stack.pop().ok_or(RunError::StackUnderflow)?,
        Inst::Push => {
            if s.stack.len() >= capacity {
                return Err(RunError::StackOverflow);
            }
            s.stack.push(s.pos);
        }
        Inst::Pop => {
            s.stack.pop().ok_or(RunError::StackUnderflow)?;
        }
        // a malformed image can restore a return address; keep pos in range
        Inst::Peek => s.pos = (*s.stack.last().ok_or(RunError::StackUnderflow)?).min(input.len()),
        Inst::PeekPop => s.pos = s.stack.pop().ok_or(RunError::StackUnderflow)?.min(input.len()),
        Inst::Str(i) => {
            let lit = &p.strings[i as usize];
            s.r = input[s.pos..].starts_with(lit);
            if s.r {
                s.pos += lit.len();
            }
        }
        Inst::Cmap(m) => {
            s.r = input.get(s.pos).is_some_and(|&b| p.bitmaps[m as usize].contains(b));
            s.pos += s.r as usize;
        }
        Inst::NChar(c) => s.r = input.get(s.pos) != Some(&c),
        Inst::NStr(i) => s.r = !input[s.pos..].starts_with(&p.strings[i as usize]),
        Inst::OStr(i) => {
            let lit = &p.strings[i as usize];
            if input[s.pos..].starts_with(lit) {
                s.pos += lit.len();
            }
            s.r = true;
        }
        Inst::OCmap(m) => {
            if input.get(s.pos).is_some_and(|&b| p.bitmaps[m as usize].contains(b)) {
                s.pos += 1;
            }
            s.r = true;
        }
        Inst::RCmap(m) => {
            let set = &p.bitmaps[m as usize];
            let run = input[s.pos..].iter().take_while(|&&b| set.contains(b)).count();
            s.pos += run;
            s.r = true;
        }
        Inst::Exit => {
            s.halted = true;
            return Ok(());
        }
    }
    s.pc = next;
    Ok(())
}

/// Applies one transition to `state`. A halted state is left unchanged.
/// Positions past the end of `input` are treated as end of input.
pub fn step(
    state: &mut MachineState,
    p: &Program,
    input: &[u8],
    cfg: &RunConfig,
) -> Result<(), RunError> {
    if state.halted {
        return Ok(());
    }
    state.pos = state.pos.min(input.len());
    exec(state, p, input, cfg.stack_slots, cfg.strict)
}

/// Runs `p` on `input` from the start state until `exit` or an error.
pub fn run(p: &Program, input: &[u8], cfg: &RunConfig) -> ParseResult {
    let limit = cfg.step_limit.unwrap_or_else(|| default_step_limit(input.len()));
    let mut s = MachineState::new(p);
    s.stack.reserve(cfg.stack_slots.min(1 << 16));
    let mut steps = 0u64;
    let mut max_sp = 0usize;
    let error = loop {
        if s.halted {
            break None;
        }
        if steps >= limit {
            break Some(RunError::StepLimit);
        }
        steps += 1;
        if let Err(e) = exec(&mut s, p, input, cfg.stack_slots, cfg.strict) {
            break Some(e);
        }
        max_sp = max_sp.max(s.stack.len());
    };
    let matched = error.is_none() && s.r;
    ParseResult {
        matched,
        consumed: if matched { s.pos } else { 0 },
        max_stack_depth: max_sp,
        steps,
        error,
    }
}
