//! Seeded generators for inputs accepted by the corpus grammars.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
const MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

fn word(rng: &mut StdRng, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n)
        .map(|_| ALNUM[rng.gen_range(0..ALNUM.len())] as char)
        .collect()
}

/// `rows` CSV records of `cols` fields each, every record newline-terminated.
pub fn csv_rows(rows: usize, cols: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..rows {
        for c in 0..cols {
            if c > 0 {
                out.push(b',');
            }
            // empty fields are legal too
            let w = word(&mut rng, 0, 12);
            out.extend_from_slice(w.as_bytes());
        }
        out.push(b'\n');
    }
    out
}

/// CSV with 8 columns and as many rows as fit in about `bytes` bytes.
pub fn csv_of_size(bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(bytes + 128);
    while out.len() < bytes {
        for c in 0..8 {
            if c > 0 {
                out.push(b',');
            }
            let w = word(&mut rng, 0, 12);
            out.extend_from_slice(w.as_bytes());
        }
        out.push(b'\n');
    }
    out
}

/// One syslog line, newline terminated.
fn syslog_line(rng: &mut StdRng) -> String {
    let month = MONTHS[rng.gen_range(0..12)];
    let day = rng.gen_range(1..=31);
    let day = if day < 10 {
        format!(" {day}")
    } else {
        day.to_string()
    };
    let host = word(rng, 3, 10);
    let process = word(rng, 3, 12);
    let pid: u32 = rng.gen_range(1..99_999);
    let msg: Vec<String> = (0..rng.gen_range(1..10)).map(|_| word(rng, 1, 9)).collect();
    format!(
        "{month} {day} {:02}:{:02}:{:02} {host} {process}[{pid}]: {}\n",
        rng.gen_range(0..24),
        rng.gen_range(0..60),
        rng.gen_range(0..60),
        msg.join(" ")
    )
}

pub fn syslog_lines(lines: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..lines).flat_map(|_| syslog_line(&mut rng).into_bytes()).collect()
}

pub fn syslog_of_size(bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < bytes {
        out.extend_from_slice(syslog_line(&mut rng).as_bytes());
    }
    out
}

fn json_scalar(rng: &mut StdRng, out: &mut String) {
    let kind = rng.gen_range(0..6);
    json_scalar_of(rng, kind, out);
}

fn json_scalar_of(rng: &mut StdRng, kind: u32, out: &mut String) {
    match kind {
        0 => out.push_str(&format!("\"{}\"", word(rng, 0, 8))),
        1 => out.push_str(&rng.gen_range(-1000i32..100_000).to_string()),
        2 => out.push_str(&format!("{:.3}", rng.gen_range(-50.0f64..50.0))),
        3 => out.push_str("true"),
        4 => out.push_str("null"),
        _ => out.push_str("\"esc\\\"aped\\u00e9\\n\""),
    }
}

/// A JSON document nesting `depth` objects along one spine. Every level
/// has the same shape, `{"k": [one scalar of each kind], "child": ...}`, so
/// parse stack use grows by the same amount per level.
pub fn json_nested(depth: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..depth {
        out.push_str("{\"k\": [");
        for kind in 0..6 {
            if kind > 0 {
                out.push_str(", ");
            }
            json_scalar_of(&mut rng, kind, &mut out);
        }
        out.push_str("], \"child\": ");
    }
    json_scalar(&mut rng, &mut out);
    out.push_str(&"}".repeat(depth));
    out.push('\n');
    out.into_bytes()
}

/// A flat-ish JSON array of records, about `bytes` long.
pub fn json_of_size(bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::from("{\"type\": \"FeatureCollection\", \"features\": [\n");
    let mut first = true;
    while out.len() < bytes {
        if !first {
            out.push_str(",\n");
        }
        first = false;
        out.push_str("  {\"id\": ");
        json_scalar(&mut rng, &mut out);
        out.push_str(", \"geometry\": {\"coordinates\": [");
        out.push_str(&format!(
            "{:.4}, {:.4}, {:.2}",
            rng.gen_range(-180.0f64..180.0),
            rng.gen_range(-90.0f64..90.0),
            rng.gen_range(0.0f64..100.0)
        ));
        out.push_str("]}, \"tags\": [");
        for i in 0..rng.gen_range(0..4) {
            if i > 0 {
                out.push_str(", ");
            }
            json_scalar(&mut rng, &mut out);
        }
        out.push_str("], \"mag\": 1.5e-2}");
    }
    out.push_str("\n]}\n");
    out.into_bytes()
}

fn xml_element(rng: &mut StdRng, depth: usize, out: &mut String) {
    let name = format!("n{}", word(rng, 1, 6));
    out.push('<');
    out.push_str(&name);
    for _ in 0..rng.gen_range(0..3) {
        out.push_str(&format!(" a{}=\"{}\"", word(rng, 1, 4), word(rng, 0, 8)));
    }
    if depth == 0 && rng.gen_bool(0.3) {
        out.push_str("/>");
        return;
    }
    out.push('>');
    let children = if depth == 0 { 0 } else { rng.gen_range(1..4) };
    for _ in 0..children {
        match rng.gen_range(0..4) {
            0 => out.push_str(&format!("text {} ", word(rng, 1, 10))),
            1 => out.push_str("<![CDATA[ <raw> & ]] ]]>\n"),
            _ => {}
        }
        xml_element(rng, depth - 1, out);
    }
    if children == 0 {
        out.push_str(&word(rng, 0, 10));
    }
    out.push_str("</");
    out.push_str(&name);
    out.push('>');
    if rng.gen_bool(0.5) {
        out.push('\n');
    }
}

/// An XML document with a prolog and elements nested up to `depth` levels.
pub fn xml_document(depth: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::from("<?xml version=\"1.0\"?>\n<!DOCTYPE site>\n");
    xml_element(&mut rng, depth, &mut out);
    out.into_bytes()
}

pub fn xml_of_size(bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::from("<?xml version=\"1.0\"?>\n<site>\n");
    while out.len() < bytes {
        xml_element(&mut rng, 3, &mut out);
    }
    out.push_str("</site>\n");
    out.into_bytes()
}

/// Prose with e-mail addresses sprinkled in.
pub fn email_text_of_size(bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::new();
    while out.len() < bytes {
        if rng.gen_ratio(1, 12) {
            out.push_str(&format!(
                "{}.{}@{}-mail.{}.com",
                word(&mut rng, 1, 8),
                word(&mut rng, 1, 6),
                word(&mut rng, 2, 6),
                word(&mut rng, 2, 4)
            ));
        } else {
            out.push_str(&word(&mut rng, 1, 9));
        }
        out.push(if rng.gen_ratio(1, 10) { '\n' } else { ' ' });
    }
    out.into_bytes()
}

/// Valid UTF-8 mixing ASCII with 2-, 3- and 4-byte sequences.
pub fn utf8_text_of_size(bytes: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::new();
    while out.len() < bytes {
        let c = match rng.gen_range(0..10) {
            0..=4 => rng.gen_range(0x20u32..0x7f),
            5 => rng.gen_range(0x80..0x800),
            6..=8 => rng.gen_range(0x3040..0x30ff),
            _ => rng.gen_range(0x1_0000..0x1_0fff),
        };
        out.push(char::from_u32(c).unwrap_or('?'));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(csv_rows(5, 3, 7), csv_rows(5, 3, 7));
        assert_eq!(csv_rows(10, 3, 1).iter().filter(|&&b| b == b'\n').count(), 10);
        assert!(csv_of_size(1000, 1).len() >= 1000);
        assert!(std::str::from_utf8(&utf8_text_of_size(500, 3)).is_ok());
        assert!(std::str::from_utf8(&json_nested(4, 3)).is_ok());
    }
}
