use super::{Inst, Program, HEADER_BYTES, MAGIC, VERSION};
use crate::charset::ByteSet;
use crate::compiler::Opcode;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("E_MAGIC: not a bytecode image")]
    Magic,
    #[error("E_VERSION: unsupported format version {0}")]
    Version(u8),
    #[error("E_TRUNCATED: image ends early")]
    Truncated,
    #[error("E_BAD_OPCODE: instruction {0} has an unknown opcode")]
    BadOpcode(usize),
    #[error("E_BAD_TARGET: instruction {0} branches outside the code")]
    BadTarget(usize),
    #[error("E_BAD_POOL_INDEX: instruction {0} refers past the end of its pool")]
    BadPoolIndex(usize),
    #[error("E_BAD_ARGUMENT: instruction {0} has an out-of-range argument")]
    BadArgument(usize),
    #[error("E_BAD_START: start index {0} is outside the code")]
    BadStart(usize),
    #[error("E_TRAILING_BYTES: {0} bytes after the bitmap pool")]
    TrailingBytes(usize),
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self.at.checked_add(n).ok_or(DecodeError::Truncated)?;
        let s = self.bytes.get(self.at..end).ok_or(DecodeError::Truncated)?;
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }
}

/// Parses and structurally validates a bytecode image.
pub fn decode(bytes: &[u8]) -> Result<Program, DecodeError> {
    if bytes.len() < 4 {
        return Err(if MAGIC.starts_with(bytes) {
            DecodeError::Truncated
        } else {
            DecodeError::Magic
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(DecodeError::Magic);
    }
    let mut r = Reader { bytes, at: 4 };
    let version = r.u8()?;
    if version != VERSION {
        return Err(DecodeError::Version(version));
    }
    let n_code = r.u16()? as usize;
    let n_strings = r.u16()? as usize;
    let n_bitmaps = r.u16()? as usize;
    let start = r.u16()? as usize;
    debug_assert_eq!(r.at, HEADER_BYTES);

    let mut words = Vec::with_capacity(n_code);
    for _ in 0..n_code {
        words.push(r.u16()?);
    }
    let mut strings = Vec::with_capacity(n_strings);
    for _ in 0..n_strings {
        let len = r.u8()? as usize;
        strings.push(r.take(len)?.to_vec());
    }
    let mut bitmaps = Vec::with_capacity(n_bitmaps);
    for _ in 0..n_bitmaps {
        let b: &[u8; 32] = r.take(32)?.try_into().expect("took 32 bytes");
        bitmaps.push(ByteSet::from_bitmap(b));
    }
    if r.at != bytes.len() {
        return Err(DecodeError::TrailingBytes(bytes.len() - r.at));
    }
    if start >= n_code {
        return Err(DecodeError::BadStart(start));
    }

    let mut code = Vec::with_capacity(n_code);
    for (i, &w) in words.iter().enumerate() {
        let op = Opcode::from_u8((w >> 11) as u8).ok_or(DecodeError::BadOpcode(i))?;
        let arg = w & 0x7ff;
        let target = || {
            // sign-extend the 11-bit offset
            let off = ((arg << 5) as i16 >> 5) as i64;
            let t = i as i64 + off;
            if (0..n_code as i64).contains(&t) {
                Ok(t as u32)
            } else {
                Err(DecodeError::BadTarget(i))
            }
        };
        let string = || {
            if (arg as usize) < n_strings {
                Ok(u32::from(arg))
            } else {
                Err(DecodeError::BadPoolIndex(i))
            }
        };
        let bitmap = || {
            if (arg as usize) < n_bitmaps {
                Ok(u32::from(arg))
            } else {
                Err(DecodeError::BadPoolIndex(i))
            }
        };
        let byte = || u8::try_from(arg).map_err(|_| DecodeError::BadArgument(i));
        let no_arg = |ins: Inst| {
            if arg == 0 {
                Ok(ins)
            } else {
                Err(DecodeError::BadArgument(i))
            }
        };
        code.push(match op {
            Opcode::Nop => no_arg(Inst::Nop)?,
            Opcode::Succ => no_arg(Inst::Succ)?,
            Opcode::Fail => no_arg(Inst::Fail)?,
            Opcode::Char => Inst::Char(byte()?),
            Opcode::Any => no_arg(Inst::Any)?,
            Opcode::Jump => Inst::Jump(target()?),
            Opcode::IfFail => Inst::IfFail(target()?),
            Opcode::Call => Inst::Call(target()?),
            Opcode::Ret => no_arg(Inst::Ret)?,
            Opcode::Push => no_arg(Inst::Push)?,
            Opcode::Pop => no_arg(Inst::Pop)?,
            Opcode::Peek => no_arg(Inst::Peek)?,
            Opcode::Str => Inst::Str(string()?),
            Opcode::Cmap => Inst::Cmap(bitmap()?),
            Opcode::NChar => Inst::NChar(byte()?),
            Opcode::NStr => Inst::NStr(string()?),
            Opcode::OStr => Inst::OStr(string()?),
            Opcode::OCmap => Inst::OCmap(bitmap()?),
            Opcode::RCmap => Inst::RCmap(bitmap()?),
            Opcode::PeekPop => no_arg(Inst::PeekPop)?,
            Opcode::Exit => no_arg(Inst::Exit)?,
        });
    }
    Ok(Program {
        code,
        strings,
        bitmaps,
        start: start as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bytecode::encode;
    use crate::compiler::compile_grammar;
    use crate::corpus::GRAMMARS;
    use crate::grammar::parse_grammar;

    fn header(n_code: u16, n_str: u16, n_bmp: u16, start: u16) -> Vec<u8> {
        let mut v = b"PVM1\x01".to_vec();
        for x in [n_code, n_str, n_bmp, start] {
            v.extend_from_slice(&x.to_le_bytes());
        }
        v
    }

    #[test]
    fn corpus_round_trips() {
        for (name, src) in GRAMMARS {
            let block = compile_grammar(&parse_grammar(src).unwrap()).unwrap();
            // unoptimized code for the larger grammars branches too far
            let bytes = match encode(&block) {
                Err(crate::bytecode::EncodeError::JumpRange { .. }) if block.len() > 1024 => continue,
                r => r.unwrap(),
            };
            let p = decode(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(p, crate::bytecode::link(&block).unwrap());
            assert_eq!(p.to_bytes().unwrap(), bytes);
        }
    }

    #[test]
    fn header_errors() {
        assert_eq!(decode(b"XXXX\x01"), Err(DecodeError::Magic));
        assert_eq!(decode(b"PV"), Err(DecodeError::Truncated));
        assert_eq!(decode(b""), Err(DecodeError::Truncated));
        assert_eq!(decode(b"PVM1\x02"), Err(DecodeError::Version(2)));
        assert_eq!(decode(b"PVM1\x01\x01"), Err(DecodeError::Truncated));
        let mut img = header(2, 0, 0, 0);
        img.extend_from_slice(&(20u16 << 11).to_le_bytes());
        assert_eq!(decode(&img), Err(DecodeError::Truncated));
    }

    #[test]
    fn instruction_errors() {
        let one = |w: u16| {
            let mut img = header(1, 0, 0, 0);
            img.extend_from_slice(&w.to_le_bytes());
            decode(&img)
        };
        assert_eq!(one(31 << 11), Err(DecodeError::BadOpcode(0)));
        assert_eq!(one(21 << 11), Err(DecodeError::BadOpcode(0)));
        assert_eq!(one((5 << 11) | 1), Err(DecodeError::BadTarget(0)));
        assert_eq!(one((5 << 11) | 0x7ff), Err(DecodeError::BadTarget(0)));
        assert_eq!(one(13 << 11), Err(DecodeError::BadPoolIndex(0)));
        assert_eq!(one((3 << 11) | 256), Err(DecodeError::BadArgument(0)));
        assert_eq!(one((1 << 11) | 1), Err(DecodeError::BadArgument(0)));
        assert_eq!(one(5 << 11).unwrap().code, vec![Inst::Jump(0)]);
        let mut img = header(1, 0, 0, 1);
        img.extend_from_slice(&(20u16 << 11).to_le_bytes());
        assert_eq!(decode(&img), Err(DecodeError::BadStart(1)));
        let mut img = header(1, 0, 0, 0);
        img.extend_from_slice(&[0, 0xa0, 7]);
        assert_eq!(decode(&img), Err(DecodeError::TrailingBytes(1)));
    }
}
