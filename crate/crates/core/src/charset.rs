//! 256-bit byte sets used by character classes and `cmap`-family instructions.

use std::fmt;

/// A set of byte values, stored as a 256-bit map (bit `i` set means byte `i`
/// is a member).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ByteSet([u64; 4]);

impl ByteSet {
    pub const fn new() -> Self {
        ByteSet([0; 4])
    }

    pub const fn full() -> Self {
        ByteSet([u64::MAX; 4])
    }

    pub fn from_bytes<I: IntoIterator<Item = u8>>(bytes: I) -> Self {
        let mut set = ByteSet::new();
        for b in bytes {
            set.insert(b);
        }
        set
    }

    pub fn from_range(lo: u8, hi: u8) -> Self {
        let mut set = ByteSet::new();
        set.insert_range(lo, hi);
        set
    }

    #[inline]
    pub fn contains(&self, b: u8) -> bool {
        self.0[(b >> 6) as usize] & (1u64 << (b & 63)) != 0
    }

    #[inline]
    pub fn insert(&mut self, b: u8) {
        self.0[(b >> 6) as usize] |= 1u64 << (b & 63);
    }

    pub fn insert_range(&mut self, lo: u8, hi: u8) {
        for b in lo..=hi {
            self.insert(b);
        }
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &ByteSet) -> ByteSet {
        ByteSet([
            self.0[0] | other.0[0],
            self.0[1] | other.0[1],
            self.0[2] | other.0[2],
            self.0[3] | other.0[3],
        ])
    }

    pub fn complement(&self) -> ByteSet {
        ByteSet([!self.0[0], !self.0[1], !self.0[2], !self.0[3]])
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |&b| self.contains(b))
    }

    /// The single member, if the set has exactly one.
    pub fn single(&self) -> Option<u8> {
        if self.len() == 1 {
            self.iter().next()
        } else {
            None
        }
    }

    /// Maximal runs of consecutive members as inclusive `(lo, hi)` pairs.
    pub fn ranges(&self) -> Vec<(u8, u8)> {
        let mut out: Vec<(u8, u8)> = Vec::new();
        for b in self.iter() {
            match out.last_mut() {
                Some((_, hi)) if *hi as u16 + 1 == b as u16 => *hi = b,
                _ => out.push((b, b)),
            }
        }
        out
    }

    /// 32-byte little-endian bitmap: bit `i % 8` of byte `i / 8` is member `i`.
    pub fn to_bitmap(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, w) in self.0.iter().enumerate() {
            out[i * 8..i * 8 + 8].copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bitmap(bytes: &[u8; 32]) -> Self {
        let mut words = [0u64; 4];
        for (i, w) in words.iter_mut().enumerate() {
            let mut chunk = [0u8; 8];
            chunk.copy_from_slice(&bytes[i * 8..i * 8 + 8]);
            *w = u64::from_le_bytes(chunk);
        }
        ByteSet(words)
    }

    /// Bracketed class notation, e.g. `[0-9A-Fa-f]`. Sets with more than 128
    /// members render as a negated class of their complement.
    pub fn to_class_string(&self) -> String {
        self.class_notation(true)
    }

    /// Bracketed class notation without negation, as accepted by the grammar
    /// parser.
    pub fn to_positive_class_string(&self) -> String {
        self.class_notation(false)
    }

    fn class_notation(&self, allow_negation: bool) -> String {
        if allow_negation && self.len() > 128 {
            let mut s = String::from("[^");
            push_ranges(&mut s, &self.complement());
            s.push(']');
            return s;
        }
        let mut s = String::from("[");
        push_ranges(&mut s, self);
        s.push(']');
        s
    }
}

fn push_ranges(out: &mut String, set: &ByteSet) {
    for (lo, hi) in set.ranges() {
        push_class_byte(out, lo);
        if lo.checked_add(1) == Some(hi) {
            push_class_byte(out, hi);
        } else if hi > lo {
            out.push('-');
            push_class_byte(out, hi);
        }
    }
}

/// Escapes a byte for use inside a bracketed class.
pub(crate) fn push_class_byte(out: &mut String, b: u8) {
    match b {
        b']' => out.push_str("\\]"),
        b'[' => out.push_str("\\["),
        b'\\' => out.push_str("\\\\"),
        b'-' => out.push_str("\\-"),
        b'^' => out.push_str("\\^"),
        _ => push_escaped_byte(out, b),
    }
}

/// Escapes control and non-ASCII bytes; printable ASCII is emitted as is.
pub(crate) fn push_escaped_byte(out: &mut String, b: u8) {
    match b {
        b'\n' => out.push_str("\\n"),
        b'\r' => out.push_str("\\r"),
        b'\t' => out.push_str("\\t"),
        0x20..=0x7e => out.push(b as char),
        _ => out.push_str(&format!("\\x{b:02x}")),
    }
}

impl fmt::Debug for ByteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_class_string())
    }
}

impl FromIterator<u8> for ByteSet {
    fn from_iter<T: IntoIterator<Item = u8>>(iter: T) -> Self {
        ByteSet::from_bytes(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_ranges() {
        let mut set = ByteSet::from_range(b'0', b'9');
        set.insert_range(b'a', b'f');
        set.insert(b'x');
        assert_eq!(set.len(), 17);
        assert!(set.contains(b'5') && set.contains(b'x') && !set.contains(b'g'));
        assert_eq!(set.ranges(), vec![(b'0', b'9'), (b'a', b'f'), (b'x', b'x')]);
        assert_eq!(set.to_class_string(), "[0-9a-fx]");
    }

    #[test]
    fn top_byte_alone() {
        let set = ByteSet::from_bytes([0x41, 0xff]);
        assert_eq!(set.to_class_string(), "[A\\xff]");
        assert_eq!(ByteSet::from_range(0xfe, 0xff).to_class_string(), "[\\xfe\\xff]");
    }

    #[test]
    fn boundary_bytes() {
        let set = ByteSet::from_bytes([0u8, 63, 64, 127, 128, 255]);
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![0, 63, 64, 127, 128, 255]);
        assert_eq!(ByteSet::from_bitmap(&set.to_bitmap()), set);
        assert_eq!(ByteSet::full().len(), 256);
        assert!(ByteSet::full().complement().is_empty());
    }

    #[test]
    fn class_rendering_escapes() {
        assert_eq!(ByteSet::from_bytes(*b",\n").to_class_string(), "[\\n,]");
        assert_eq!(ByteSet::from_bytes(*b"ab").to_class_string(), "[ab]");
        assert_eq!(ByteSet::from_bytes(*b"]-").to_class_string(), "[\\-\\]]");
        let not_comma = ByteSet::from_bytes(*b",").complement();
        assert_eq!(not_comma.to_class_string(), "[^,]");
    }
}
