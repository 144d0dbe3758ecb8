use std::collections::HashMap;

use super::{Inst, Program, MAGIC, MAX_OFFSET, MAX_POOL_INDEX, MAX_STRING_LEN, MIN_OFFSET, VERSION};
use crate::charset::ByteSet;
use crate::compiler::{CodeBlock, Instruction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("E_JUMP_RANGE: instruction {index} branches {offset} words away (limit -1024..=1023)")]
    JumpRange { index: usize, offset: i64 },
    #[error("E_POOL_OVERFLOW: {0}")]
    PoolOverflow(String),
    #[error("E_CODE_SIZE: {0} instructions do not fit a 16-bit count")]
    CodeSize(usize),
}

#[derive(Default)]
struct Pools {
    strings: Vec<Vec<u8>>,
    string_ix: HashMap<Vec<u8>, u32>,
    bitmaps: Vec<ByteSet>,
    bitmap_ix: HashMap<ByteSet, u32>,
}

impl Pools {
    fn string(&mut self, s: &[u8]) -> Result<u32, EncodeError> {
        if s.len() > MAX_STRING_LEN {
            return Err(EncodeError::PoolOverflow(format!(
                "string of {} bytes exceeds 255",
                s.len()
            )));
        }
        if let Some(&i) = self.string_ix.get(s) {
            return Ok(i);
        }
        let i = self.strings.len();
        if i > MAX_POOL_INDEX {
            return Err(EncodeError::PoolOverflow("more than 2048 strings".into()));
        }
        self.strings.push(s.to_vec());
        self.string_ix.insert(s.to_vec(), i as u32);
        Ok(i as u32)
    }

    fn bitmap(&mut self, set: &ByteSet) -> Result<u32, EncodeError> {
        if let Some(&i) = self.bitmap_ix.get(set) {
            return Ok(i);
        }
        let i = self.bitmaps.len();
        if i > MAX_POOL_INDEX {
            return Err(EncodeError::PoolOverflow("more than 2048 bitmaps".into()));
        }
        self.bitmaps.push(*set);
        self.bitmap_ix.insert(*set, i as u32);
        Ok(i as u32)
    }
}

/// Resolves labels and production names to absolute indices and builds the
/// deduplicated constant pools. Execution starts at index 0.
pub fn link(block: &CodeBlock) -> Result<Program, EncodeError> {
    let mut pools = Pools::default();
    let mut code = Vec::with_capacity(block.len());
    for ins in block.instructions() {
        let target = |l| block.target(l) as u32;
        code.push(match ins {
            Instruction::Nop => Inst::Nop,
            Instruction::Succ => Inst::Succ,
            Instruction::Fail => Inst::Fail,
            Instruction::Char(c) => Inst::Char(*c),
            Instruction::Any => Inst::Any,
            Instruction::Jump(l) => Inst::Jump(target(*l)),
            Instruction::IfFail(l) => Inst::IfFail(target(*l)),
            Instruction::Call(name) => {
                Inst::Call(block.entry(name).expect("calls resolve in a checked block") as u32)
            }
            Instruction::Ret => Inst::Ret,
            Instruction::Push => Inst::Push,
            Instruction::Pop => Inst::Pop,
            Instruction::Peek => Inst::Peek,
            Instruction::Str(s) => Inst::Str(pools.string(s)?),
            Instruction::Cmap(m) => Inst::Cmap(pools.bitmap(m)?),
            Instruction::NChar(c) => Inst::NChar(*c),
            Instruction::NStr(s) => Inst::NStr(pools.string(s)?),
            Instruction::OStr(s) => Inst::OStr(pools.string(s)?),
            Instruction::OCmap(m) => Inst::OCmap(pools.bitmap(m)?),
            Instruction::RCmap(m) => Inst::RCmap(pools.bitmap(m)?),
            Instruction::PeekPop => Inst::PeekPop,
            Instruction::Exit => Inst::Exit,
        });
    }
    Ok(Program {
        code,
        strings: pools.strings,
        bitmaps: pools.bitmaps,
        start: 0,
    })
}

/// Links and serializes a code block.
pub fn encode(block: &CodeBlock) -> Result<Vec<u8>, EncodeError> {
    write_image(&link(block)?)
}

fn word(op: u8, arg: u16) -> u16 {
    debug_assert!(op < 32 && arg < 2048);
    (u16::from(op) << 11) | arg
}

fn relative(index: usize, target: u32) -> Result<u16, EncodeError> {
    let offset = i64::from(target) - index as i64;
    if offset < i64::from(MIN_OFFSET) || offset > i64::from(MAX_OFFSET) {
        return Err(EncodeError::JumpRange { index, offset });
    }
    Ok((offset as u16) & 0x7ff)
}

fn pool_arg(i: u32) -> Result<u16, EncodeError> {
    if i as usize > MAX_POOL_INDEX {
        return Err(EncodeError::PoolOverflow(format!("pool index {i} exceeds 2047")));
    }
    Ok(i as u16)
}

pub(super) fn write_image(p: &Program) -> Result<Vec<u8>, EncodeError> {
    let count = |n: usize| u16::try_from(n).map_err(|_| EncodeError::CodeSize(n));
    let n_code = count(p.code.len())?;
    let n_strings = count(p.strings.len())?;
    let n_bitmaps = count(p.bitmaps.len())?;
    if p.strings.len() > MAX_POOL_INDEX + 1 || p.bitmaps.len() > MAX_POOL_INDEX + 1 {
        return Err(EncodeError::PoolOverflow("pool has more than 2048 entries".into()));
    }
    let start = count(p.start as usize)?;

    let mut out = Vec::with_capacity(p.image_bytes());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for v in [n_code, n_strings, n_bitmaps, start] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for (i, ins) in p.code.iter().enumerate() {
        let arg = match *ins {
            Inst::Char(c) | Inst::NChar(c) => u16::from(c),
            Inst::Jump(t) | Inst::IfFail(t) | Inst::Call(t) => relative(i, t)?,
            Inst::Str(s) | Inst::NStr(s) | Inst::OStr(s) => pool_arg(s)?,
            Inst::Cmap(m) | Inst::OCmap(m) | Inst::RCmap(m) => pool_arg(m)?,
            _ => 0,
        };
        out.extend_from_slice(&word(ins.opcode() as u8, arg).to_le_bytes());
    }
    for s in &p.strings {
        if s.len() > MAX_STRING_LEN {
            return Err(EncodeError::PoolOverflow(format!(
                "string of {} bytes exceeds 255",
                s.len()
            )));
        }
        out.push(s.len() as u8);
        out.extend_from_slice(s);
    }
    for m in &p.bitmaps {
        out.extend_from_slice(&m.to_bitmap());
    }
    Ok(out)
}
