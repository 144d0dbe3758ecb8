//! Fixed-width bytecode: every instruction is one little-endian 16-bit word
//! with a 5-bit opcode and an 11-bit argument.
//!
//! Image layout:
//!
//! ```text
//! "PVM1"  version:u8  n_code:u16  n_strings:u16  n_bitmaps:u16  start:u16
//! code:    n_code x u16
//! strings: n_strings x (len:u8, bytes)
//! bitmaps: n_bitmaps x 32 bytes, bit i set when byte value i matches
//! ```
//!
//! `jump`, `iffail` and `call` carry a signed offset from their own index.
//! String and bitmap operands index the pools; `char`/`nchar` carry the byte.

mod decode;
mod disasm;
mod encode;

use crate::charset::ByteSet;
use crate::compiler::Opcode;

pub use decode::{decode, DecodeError};
pub use disasm::{disassemble, quote_char, quote_str};
pub use encode::{encode, link, EncodeError};

pub const MAGIC: &[u8; 4] = b"PVM1";
pub const VERSION: u8 = 1;
/// Magic, version byte and four 16-bit counts.
pub const HEADER_BYTES: usize = 13;

pub const MAX_OFFSET: i32 = 1023;
pub const MIN_OFFSET: i32 = -1024;
pub const MAX_POOL_INDEX: usize = 2047;
pub const MAX_STRING_LEN: usize = 255;

/// A decoded instruction; branch and call operands are absolute indices,
/// pool operands are indices into the program's tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inst {
    Nop,
    Succ,
    Fail,
    Char(u8),
    Any,
    Jump(u32),
    IfFail(u32),
    Call(u32),
    Ret,
    Push,
    Pop,
    Peek,
    Str(u32),
    Cmap(u32),
    NChar(u8),
    NStr(u32),
    OStr(u32),
    OCmap(u32),
    RCmap(u32),
    PeekPop,
    Exit,
}

impl Inst {
    pub fn opcode(self) -> Opcode {
        match self {
            Inst::Nop => Opcode::Nop,
            Inst::Succ => Opcode::Succ,
            Inst::Fail => Opcode::Fail,
            Inst::Char(_) => Opcode::Char,
            Inst::Any => Opcode::Any,
            Inst::Jump(_) => Opcode::Jump,
            Inst::IfFail(_) => Opcode::IfFail,
            Inst::Call(_) => Opcode::Call,
            Inst::Ret => Opcode::Ret,
            Inst::Push => Opcode::Push,
            Inst::Pop => Opcode::Pop,
            Inst::Peek => Opcode::Peek,
            Inst::Str(_) => Opcode::Str,
            Inst::Cmap(_) => Opcode::Cmap,
            Inst::NChar(_) => Opcode::NChar,
            Inst::NStr(_) => Opcode::NStr,
            Inst::OStr(_) => Opcode::OStr,
            Inst::OCmap(_) => Opcode::OCmap,
            Inst::RCmap(_) => Opcode::RCmap,
            Inst::PeekPop => Opcode::PeekPop,
            Inst::Exit => Opcode::Exit,
        }
    }
}

/// A linked or decoded program, ready to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub code: Vec<Inst>,
    pub strings: Vec<Vec<u8>>,
    pub bitmaps: Vec<ByteSet>,
    pub start: u32,
}

impl Program {
    /// Size of the code section in bytes.
    pub fn code_bytes(&self) -> usize {
        2 * self.code.len()
    }

    /// Size of the whole encoded image in bytes.
    pub fn image_bytes(&self) -> usize {
        HEADER_BYTES
            + self.code_bytes()
            + self.strings.iter().map(|s| 1 + s.len()).sum::<usize>()
            + 32 * self.bitmaps.len()
    }

    /// Serializes the program; fails only when an operand does not fit.
    pub fn to_bytes(&self) -> Result<Vec<u8>, EncodeError> {
        encode::write_image(self)
    }
}
