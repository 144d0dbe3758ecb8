//! Writes seed inputs for the fuzz targets under the given directory
//! (default `fuzz/corpus`).

use std::fs;
use std::path::{Path, PathBuf};

use pegvm::bytecode::encode;
use pegvm::corpus::{self, GRAMMARS};
use pegvm::grammar::parse_grammar;
use pegvm::optimizer::{optimize, OptimizationConfig};

const SMALL: [&str; 4] = ["A = 'a' A / ''", "A = !'c' .", "S = ('x' / 'y')* [0-9]? 'end'", "A = &'q' 'q' !."];

fn write(dir: &Path, name: &str, bytes: &[u8]) {
    fs::create_dir_all(dir).expect("create corpus dir");
    fs::write(dir.join(name), bytes).expect("write seed");
}

fn image(src: &str, bits: u8) -> Option<Vec<u8>> {
    encode(&optimize(&parse_grammar(src).ok()?, &OptimizationConfig::from_bits(bits)).ok()?).ok()
}

/// Two-byte little-endian length, the image, then the input.
fn framed(image: &[u8], input: &[u8]) -> Vec<u8> {
    let mut out = (image.len() as u16).to_le_bytes().to_vec();
    out.extend_from_slice(image);
    out.extend_from_slice(input);
    out
}

/// Pass mask, grammar text, a zero byte, then the input.
fn pipeline(bits: u8, src: &str, input: &[u8]) -> Vec<u8> {
    let mut out = vec![bits];
    out.extend_from_slice(src.as_bytes());
    out.push(0);
    out.extend_from_slice(input);
    out
}

fn main() {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fuzz/corpus"));
    let small: Vec<(String, &str)> = SMALL.iter().enumerate().map(|(i, s)| (format!("small{i}"), *s)).collect();
    let all: Vec<(String, &str)> = GRAMMARS.iter().map(|(n, s)| (n.to_string(), *s)).chain(small).collect();
    for (name, src) in &all {
        write(&root.join("parse_grammar"), &format!("{name}.peg"), src.as_bytes());
        let input = corpus::sample_input(name, 120, 1).unwrap_or_else(|| b"aaaa".to_vec());
        for bits in [0u8, 31] {
            if let Some(img) = image(src, bits) {
                write(&root.join("decode_bytecode"), &format!("{name}-{bits}.pvb"), &img);
                write(&root.join("decode_and_run"), &format!("{name}-{bits}"), &framed(&img, &input));
            }
        }
        let short = &input[..input.len().min(48)];
        write(&root.join("compile_pipeline"), &format!("{name}-all"), &pipeline(31, src, short));
        write(&root.join("compile_pipeline"), &format!("{name}-none"), &pipeline(0, src, short));
    }
}
