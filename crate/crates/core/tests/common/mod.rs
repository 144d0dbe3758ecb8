//! Random grammars, inputs and code blocks shared by the integration tests.
#![allow(dead_code)]

use pegvm::charset::ByteSet;
use pegvm::compiler::{CodeBlock, Instruction, Label};
use pegvm::grammar::{validate_grammar, Expression, Grammar, Production};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const MAX_DEPTH: usize = 5;
pub const MAX_ALPHABET: usize = 8;
pub const MAX_INPUT: usize = 64;

const POOL: &[u8] = b"ab,\nxy0[";

/// A grammar together with the bytes its terminals draw from.
pub struct Sample {
    pub grammar: Grammar,
    pub alphabet: Vec<u8>,
}

struct Gen<'r> {
    rng: &'r mut StdRng,
    alphabet: Vec<u8>,
    names: Vec<String>,
}

impl Gen<'_> {
    fn byte(&mut self) -> u8 {
        *self.alphabet.choose(self.rng).expect("non-empty alphabet")
    }

    fn leaf(&mut self) -> Expression {
        match self.rng.gen_range(0..10) {
            0..=3 => Expression::Char(self.byte()),
            4 => {
                let n = self.rng.gen_range(1..=self.alphabet.len());
                let set: ByteSet = self.alphabet.choose_multiple(self.rng, n).copied().collect();
                Expression::Class(set)
            }
            5 => Expression::Any,
            6 => {
                let n = self.rng.gen_range(2..=3);
                let bytes: Vec<u8> = (0..n).map(|_| self.byte()).collect();
                Expression::literal(&bytes)
            }
            7 => Expression::Empty,
            _ => {
                let name = self.names.choose(self.rng).expect("names").clone();
                Expression::NonTerminal(name)
            }
        }
    }

    fn expr(&mut self, depth: usize) -> Expression {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 | 1 => {
                let n = self.rng.gen_range(2..=3);
                Expression::Sequence((0..n).map(|_| self.expr(d)).collect())
            }
            2 | 3 => {
                let n = self.rng.gen_range(2..=3);
                Expression::Choice((0..n).map(|_| self.expr(d)).collect())
            }
            4 => Expression::optional(self.expr(d)),
            5 => Expression::star(self.expr(d)),
            6 => Expression::plus(self.expr(d)),
            7 => Expression::and(self.expr(d)),
            _ => Expression::not(self.expr(d)),
        }
    }
}

/// A random grammar that passes validation: 1 to 4 productions, expression
/// depth at most [`MAX_DEPTH`], terminals over at most [`MAX_ALPHABET`] bytes.
pub fn random_grammar(rng: &mut StdRng) -> Sample {
    loop {
        let k = rng.gen_range(2..=MAX_ALPHABET);
        let mut alphabet: Vec<u8> = POOL.to_vec();
        alphabet.shuffle(rng);
        alphabet.truncate(k);
        let n = rng.gen_range(1..=4);
        let names: Vec<String> = (0..n).map(|i| format!("P{i}")).collect();
        let mut g = Gen {
            rng,
            alphabet,
            names: names.clone(),
        };
        let prods: Vec<Production> = names
            .iter()
            .map(|name| Production {
                name: name.clone(),
                body: g.expr(MAX_DEPTH),
            })
            .collect();
        let alphabet = g.alphabet;
        let grammar = Grammar::new(prods).expect("distinct names");
        if validate_grammar(&grammar).is_empty() {
            return Sample { grammar, alphabet };
        }
    }
}

/// Up to [`MAX_INPUT`] bytes, mostly from the alphabet.
pub fn random_input(rng: &mut StdRng, alphabet: &[u8]) -> Vec<u8> {
    let len = if rng.gen_bool(0.5) {
        rng.gen_range(0..=8)
    } else {
        rng.gen_range(0..=MAX_INPUT)
    };
    (0..len)
        .map(|_| {
            if rng.gen_ratio(1, 20) {
                rng.gen()
            } else {
                *alphabet.choose(rng).expect("alphabet")
            }
        })
        .collect()
}

fn random_string(rng: &mut StdRng, palette: &[Vec<u8>]) -> Vec<u8> {
    if rng.gen_bool(0.4) {
        return palette.choose(rng).expect("palette").clone();
    }
    let len = if rng.gen_ratio(1, 20) {
        rng.gen_range(0..=255)
    } else {
        rng.gen_range(0..8)
    };
    (0..len).map(|_| rng.gen()).collect()
}

fn random_set(rng: &mut StdRng, palette: &[ByteSet]) -> ByteSet {
    if rng.gen_bool(0.4) {
        return *palette.choose(rng).expect("palette");
    }
    let mut bitmap = [0u8; 32];
    rng.fill(&mut bitmap[..]);
    ByteSet::from_bitmap(&bitmap)
}

/// A structurally valid code block whose branches fit the encoding: up to
/// 1000 instructions, a `call; exit` prologue, and 1 to 4 productions.
/// Control flow is arbitrary.
pub fn random_block(rng: &mut StdRng) -> CodeBlock {
    let n = rng.gen_range(3..=1000);
    let prods = rng.gen_range(1..=4usize).min(n - 2);
    let mut starts: Vec<usize> = (3..n).collect::<Vec<_>>().choose_multiple(rng, prods - 1).copied().collect();
    starts.push(2);
    starts.sort();
    let names: Vec<String> = (0..prods).map(|i| format!("R{i}")).collect();
    let mut labels: Vec<usize> = starts.clone();
    let entries: Vec<(String, Label)> = names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), Label(i as u32)))
        .collect();
    let palette_s: Vec<Vec<u8>> = (0..3).map(|_| random_string(rng, &[b"Jan".to_vec()])).collect();
    let palette_m: Vec<ByteSet> = (0..3).map(|_| random_set(rng, &[ByteSet::from_range(b'0', b'9')])).collect();
    let mut code = vec![Instruction::Call(names[0].clone()), Instruction::Exit];
    for _ in 2..n {
        let ins = match rng.gen_range(0..21u8) {
            0 => Instruction::Nop,
            1 => Instruction::Succ,
            2 => Instruction::Fail,
            3 => Instruction::Char(rng.gen()),
            4 => Instruction::Any,
            op @ (5 | 6) => {
                labels.push(rng.gen_range(0..n));
                let l = Label(labels.len() as u32 - 1);
                if op == 5 {
                    Instruction::Jump(l)
                } else {
                    Instruction::IfFail(l)
                }
            }
            7 => Instruction::Call(names.choose(rng).expect("names").clone()),
            8 => Instruction::Ret,
            9 => Instruction::Push,
            10 => Instruction::Pop,
            11 => Instruction::Peek,
            12 => Instruction::Str(random_string(rng, &palette_s)),
            13 => Instruction::Cmap(random_set(rng, &palette_m)),
            14 => Instruction::NChar(rng.gen()),
            15 => Instruction::NStr(random_string(rng, &palette_s)),
            16 => Instruction::OStr(random_string(rng, &palette_s)),
            17 => Instruction::OCmap(random_set(rng, &palette_m)),
            18 => Instruction::RCmap(random_set(rng, &palette_m)),
            19 => Instruction::PeekPop,
            _ => Instruction::Exit,
        };
        code.push(ins);
    }
    CodeBlock::from_parts(code, labels, entries, names[0].clone()).expect("labels and calls resolve")
}

/// Step budget for screening a random pair with the plain translation.
pub const SCREEN_STEPS: u64 = 200_000;

/// Keeps the inputs the plain translation of `g` decides within
/// [`SCREEN_STEPS`]; random grammars can backtrack exponentially.
pub fn tractable_inputs(g: &Grammar, inputs: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    let block = pegvm::compiler::compile_grammar(g).expect("valid grammar");
    let program = pegvm::bytecode::link(&block).expect("pools fit");
    let cfg = pegvm::vm::RunConfig::default()
        .with_stack_slots(1 << 16)
        .with_step_limit(SCREEN_STEPS);
    inputs
        .into_iter()
        .filter(|i| pegvm::vm::run(&program, i, &cfg).error.is_none())
        .collect()
}
