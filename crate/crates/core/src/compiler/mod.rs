//! Translation of parsing expressions into abstract parsing instructions.
//!
//! A [`CodeBlock`] is the unencoded program: an instruction list whose jumps
//! refer to symbolic [`Label`]s and whose calls refer to production names.
//! Failure is signalled through the machine's result flag, and every
//! construct that may fail is followed by an `iffail` to a statically known
//! label, so alternatives are reached by local direct jumps.

pub(crate) mod analysis;
mod emit;

use std::fmt;

use crate::charset::ByteSet;

pub use analysis::{check_failure_discipline, stack_depths, CheckError};
pub use emit::{compile_expression, compile_grammar, CompileError, Emitter};

/// Symbolic jump target, resolved through [`CodeBlock::target`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

/// The numeric opcode of each instruction, as used in the encoded form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Opcode {
    Nop = 0,
    Succ = 1,
    Fail = 2,
    Char = 3,
    Any = 4,
    Jump = 5,
    IfFail = 6,
    Call = 7,
    Ret = 8,
    Push = 9,
    Pop = 10,
    Peek = 11,
    Str = 12,
    Cmap = 13,
    NChar = 14,
    NStr = 15,
    OStr = 16,
    OCmap = 17,
    RCmap = 18,
    PeekPop = 19,
    Exit = 20,
}

impl Opcode {
    pub const ALL: [Opcode; 21] = [
        Opcode::Nop,
        Opcode::Succ,
        Opcode::Fail,
        Opcode::Char,
        Opcode::Any,
        Opcode::Jump,
        Opcode::IfFail,
        Opcode::Call,
        Opcode::Ret,
        Opcode::Push,
        Opcode::Pop,
        Opcode::Peek,
        Opcode::Str,
        Opcode::Cmap,
        Opcode::NChar,
        Opcode::NStr,
        Opcode::OStr,
        Opcode::OCmap,
        Opcode::RCmap,
        Opcode::PeekPop,
        Opcode::Exit,
    ];

    pub fn from_u8(v: u8) -> Option<Opcode> {
        Opcode::ALL.get(v as usize).copied()
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Nop => "nop",
            Opcode::Succ => "succ",
            Opcode::Fail => "fail",
            Opcode::Char => "char",
            Opcode::Any => "any",
            Opcode::Jump => "jump",
            Opcode::IfFail => "iffail",
            Opcode::Call => "call",
            Opcode::Ret => "ret",
            Opcode::Push => "push",
            Opcode::Pop => "pop",
            Opcode::Peek => "peek",
            Opcode::Str => "str",
            Opcode::Cmap => "cmap",
            Opcode::NChar => "nchar",
            Opcode::NStr => "nstr",
            Opcode::OStr => "ostr",
            Opcode::OCmap => "ocmap",
            Opcode::RCmap => "rcmap",
            Opcode::PeekPop => "peekpop",
            Opcode::Exit => "exit",
        }
    }

    /// Instructions that test the input (and may consume it) or enter a
    /// production. They are only defined while the result flag is success.
    pub fn requires_success(self) -> bool {
        matches!(
            self,
            Opcode::Char
                | Opcode::Any
                | Opcode::Call
                | Opcode::Str
                | Opcode::Cmap
                | Opcode::NChar
                | Opcode::NStr
                | Opcode::OStr
                | Opcode::OCmap
                | Opcode::RCmap
        )
    }
}

/// An abstract parsing instruction. Each carries at most one argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Nop,
    Succ,
    Fail,
    Char(u8),
    Any,
    Jump(Label),
    IfFail(Label),
    Call(String),
    Ret,
    Push,
    Pop,
    Peek,
    Str(Vec<u8>),
    Cmap(ByteSet),
    NChar(u8),
    NStr(Vec<u8>),
    OStr(Vec<u8>),
    OCmap(ByteSet),
    RCmap(ByteSet),
    PeekPop,
    Exit,
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::Nop => Opcode::Nop,
            Instruction::Succ => Opcode::Succ,
            Instruction::Fail => Opcode::Fail,
            Instruction::Char(_) => Opcode::Char,
            Instruction::Any => Opcode::Any,
            Instruction::Jump(_) => Opcode::Jump,
            Instruction::IfFail(_) => Opcode::IfFail,
            Instruction::Call(_) => Opcode::Call,
            Instruction::Ret => Opcode::Ret,
            Instruction::Push => Opcode::Push,
            Instruction::Pop => Opcode::Pop,
            Instruction::Peek => Opcode::Peek,
            Instruction::Str(_) => Opcode::Str,
            Instruction::Cmap(_) => Opcode::Cmap,
            Instruction::NChar(_) => Opcode::NChar,
            Instruction::NStr(_) => Opcode::NStr,
            Instruction::OStr(_) => Opcode::OStr,
            Instruction::OCmap(_) => Opcode::OCmap,
            Instruction::RCmap(_) => Opcode::RCmap,
            Instruction::PeekPop => Opcode::PeekPop,
            Instruction::Exit => Opcode::Exit,
        }
    }

    /// The label operand of `jump`/`iffail`.
    pub fn label(&self) -> Option<Label> {
        match self {
            Instruction::Jump(l) | Instruction::IfFail(l) => Some(*l),
            _ => None,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.opcode().mnemonic();
        match self {
            Instruction::Char(c) | Instruction::NChar(c) => {
                write!(f, "{m} {}", crate::bytecode::quote_char(*c))
            }
            Instruction::Jump(l) | Instruction::IfFail(l) => write!(f, "{m} L{}", l.0),
            Instruction::Call(name) => write!(f, "{m} {name}"),
            Instruction::Str(s) | Instruction::NStr(s) | Instruction::OStr(s) => {
                write!(f, "{m} {}", crate::bytecode::quote_str(s))
            }
            Instruction::Cmap(set) | Instruction::OCmap(set) | Instruction::RCmap(set) => {
                write!(f, "{m} {}", set.to_class_string())
            }
            _ => f.write_str(m),
        }
    }
}

/// A whole-grammar program before encoding.
///
/// Execution starts at index 0 with a `call <start>; exit` prologue. Each
/// production occupies a contiguous range that begins at its entry label
/// and ends with `ret`; jump labels never cross production boundaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeBlock {
    pub(crate) code: Vec<Instruction>,
    /// Label id -> instruction index (may equal `code.len()`).
    pub(crate) labels: Vec<usize>,
    /// Production name -> entry label, in layout order.
    pub(crate) entries: Vec<(String, Label)>,
    pub(crate) start: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("label L{0} is out of range")]
    BadLabel(u32),
    #[error("call to unknown production `{0}`")]
    UnknownProduction(String),
    #[error("start production `{0}` has no entry")]
    UnknownStart(String),
}

impl CodeBlock {
    /// Assembles a block from raw parts, checking that every label and call
    /// resolves.
    pub fn from_parts(
        code: Vec<Instruction>,
        labels: Vec<usize>,
        entries: Vec<(String, Label)>,
        start: impl Into<String>,
    ) -> Result<CodeBlock, BlockError> {
        let block = CodeBlock {
            code,
            labels,
            entries,
            start: start.into(),
        };
        block.check_resolved()?;
        Ok(block)
    }

    pub(crate) fn check_resolved(&self) -> Result<(), BlockError> {
        let len = self.code.len();
        let label_ok = |l: Label| self.labels.get(l.0 as usize).is_some_and(|&i| i <= len);
        for ins in &self.code {
            match ins {
                Instruction::Jump(l) | Instruction::IfFail(l) => {
                    // jumps must land on an instruction
                    if !self.labels.get(l.0 as usize).is_some_and(|&i| i < len) {
                        return Err(BlockError::BadLabel(l.0));
                    }
                }
                Instruction::Call(name) => {
                    if self.entry(name).is_none() {
                        return Err(BlockError::UnknownProduction(name.clone()));
                    }
                }
                _ => {}
            }
        }
        for (_, l) in &self.entries {
            if !label_ok(*l) {
                return Err(BlockError::BadLabel(l.0));
            }
        }
        if self.entry(&self.start).is_none() {
            return Err(BlockError::UnknownStart(self.start.clone()));
        }
        Ok(())
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Size of the encoded code section in bytes (two bytes per instruction).
    pub fn code_bytes(&self) -> usize {
        2 * self.code.len()
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn entries(&self) -> &[(String, Label)] {
        &self.entries
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    /// Instruction index a label points at.
    pub fn target(&self, label: Label) -> usize {
        self.labels[label.0 as usize]
    }

    /// Entry index of a production.
    pub fn entry(&self, name: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| self.target(*l))
    }

    /// Index ranges of each production's code, in layout order.
    pub fn production_ranges(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let mut starts: Vec<(usize, &str)> = self
            .entries
            .iter()
            .map(|(n, l)| (self.target(*l), n.as_str()))
            .collect();
        starts.sort();
        let mut out = Vec::with_capacity(starts.len());
        for (k, &(s, name)) in starts.iter().enumerate() {
            let end = starts.get(k + 1).map_or(self.code.len(), |&(e, _)| e);
            out.push((name.to_string(), s..end));
        }
        out
    }

    /// Number of references (jumps, branches, production entries) to each
    /// instruction index; the vector has `len() + 1` slots.
    pub(crate) fn reference_counts(&self) -> Vec<usize> {
        let mut refs = vec![0; self.code.len() + 1];
        for ins in &self.code {
            if let Some(l) = ins.label() {
                refs[self.target(l)] += 1;
            }
        }
        for (_, l) in &self.entries {
            refs[self.target(*l)] += 1;
        }
        refs
    }

    /// Readable listing with symbolic labels, one instruction per line.
    pub fn listing(&self) -> String {
        let mut at: Vec<Vec<String>> = vec![Vec::new(); self.code.len() + 1];
        for (name, l) in &self.entries {
            at[self.target(*l)].push(name.clone());
        }
        let refs = self.referenced_labels();
        for (id, &idx) in self.labels.iter().enumerate() {
            if refs.contains(&(id as u32)) {
                at[idx].push(format!("L{id}"));
            }
        }
        let mut out = String::new();
        for (i, ins) in self.code.iter().enumerate() {
            for l in &at[i] {
                out.push_str(l);
                out.push_str(":\n");
            }
            out.push_str("    ");
            out.push_str(&ins.to_string());
            out.push('\n');
        }
        out
    }

    fn referenced_labels(&self) -> std::collections::HashSet<u32> {
        self.code.iter().filter_map(|i| i.label()).map(|l| l.0).collect()
    }

    /// Mnemonic-only view, handy for shape assertions.
    pub fn opcodes(&self) -> Vec<Opcode> {
        self.code.iter().map(Instruction::opcode).collect()
    }
}
