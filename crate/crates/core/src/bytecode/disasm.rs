use std::fmt::Write;

use super::{Inst, Program};
use crate::charset::push_escaped_byte;

/// `'a'`, `'\n'`, `'\''`, `'\x00'`.
pub fn quote_char(c: u8) -> String {
    quote_str(&[c])
}

/// A byte string in single quotes with PEG escapes.
pub fn quote_str(s: &[u8]) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for &b in s {
        match b {
            b'\'' => out.push_str("\\'"),
            b'\\' => out.push_str("\\\\"),
            _ => push_escaped_byte(&mut out, b),
        }
    }
    out.push('\'');
    out
}

/// One line per instruction: zero-padded index, mnemonic, and the operand
/// rendered symbolically. Branch and call targets are absolute indices.
pub fn disassemble(p: &Program) -> String {
    let mut out = String::new();
    for (i, ins) in p.code.iter().enumerate() {
        let m = ins.opcode().mnemonic();
        let _ = write!(out, "{i:04} {m}");
        match *ins {
            Inst::Char(c) | Inst::NChar(c) => {
                let _ = write!(out, " {}", quote_char(c));
            }
            Inst::Jump(t) | Inst::IfFail(t) | Inst::Call(t) => {
                let _ = write!(out, " {t:04}");
            }
            Inst::Str(s) | Inst::NStr(s) | Inst::OStr(s) => {
                let _ = write!(out, " {}", quote_str(&p.strings[s as usize]));
            }
            Inst::Cmap(m) | Inst::OCmap(m) | Inst::RCmap(m) => {
                let _ = write!(out, " {}", p.bitmaps[m as usize].to_class_string());
            }
            _ => {}
        }
        out.push('\n');
    }
    out
}
