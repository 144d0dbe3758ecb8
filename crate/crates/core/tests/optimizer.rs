mod common;

use common::random_grammar;
use pegvm::compiler::{check_failure_discipline, compile_grammar, stack_depths, CodeBlock, Instruction, Opcode::*};
use pegvm::corpus;
use pegvm::grammar::parse_grammar;
use pegvm::optimizer::{
    cumulative_sizes, flow_pass, inline_pass, lexical_pass, optimize, optimize_code, peephole_pass, unary_pass,
    OptimizationConfig,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

type CodePass = fn(&CodeBlock) -> CodeBlock;
const CODE_PASSES: [(&str, CodePass); 4] = [
    ("flow", flow_pass),
    ("peephole", peephole_pass),
    ("lex", lexical_pass),
    ("unary", unary_pass),
];

fn block(src: &str) -> CodeBlock {
    compile_grammar(&parse_grammar(src).unwrap()).unwrap()
}

fn body(b: &CodeBlock) -> Vec<pegvm::compiler::Opcode> {
    b.opcodes()[2..].to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn passes_are_idempotent_and_shrinking(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_grammar(&mut rng).grammar;
        let inlined = inline_pass(&g);
        prop_assert_eq!(inline_pass(&inlined), inlined.clone());
        let mut b = compile_grammar(&inlined).unwrap();
        prop_assert!(b.len() <= compile_grammar(&g).unwrap().len());
        for (name, pass) in CODE_PASSES {
            let next = pass(&b);
            prop_assert!(next.len() <= b.len(), "{name} grew the code");
            prop_assert_eq!(pass(&next), next.clone(), "{} is not idempotent", name);
            prop_assert!(stack_depths(&next).is_ok(), "{name} unbalanced");
            prop_assert!(check_failure_discipline(&next).is_ok(), "{name} broke discipline");
            b = next;
        }
    }

    #[test]
    fn each_pass_alone_is_sound_on_plain_code(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let plain = compile_grammar(&random_grammar(&mut rng).grammar).unwrap();
        for (name, pass) in CODE_PASSES {
            let out = pass(&plain);
            prop_assert!(stack_depths(&out).is_ok(), "{name}");
            prop_assert!(check_failure_discipline(&out).is_ok(), "{name}");
        }
    }
}

#[test]
fn corpus_sizes_shrink_monotonically() {
    for (name, src) in corpus::GRAMMARS {
        let g = parse_grammar(src).unwrap();
        let sizes = cumulative_sizes(&g).unwrap().as_array();
        assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{name}: {sizes:?}");
        assert_eq!(sizes[5], optimize(&g, &OptimizationConfig::all()).unwrap().len());
        assert!(10 * sizes[5] <= 6 * sizes[0], "{name}: {sizes:?}");
    }
}

#[test]
fn not_char_collapses_to_two_instructions() {
    let plain = block("A = !'c'");
    assert_eq!(
        body(&plain),
        [Push, Char, IfFail, Peek, Pop, Fail, Jump, Peek, Pop, Succ, Ret]
    );
    let out = optimize_code(&plain, &OptimizationConfig::all());
    assert_eq!(body(&out), [NChar, IfFail, Ret]);
    assert_eq!(out.instructions()[2], Instruction::NChar(b'c'));
}

#[test]
fn peek_pop_fuses() {
    let b = flow_pass(&block("A = ('x' / 'y') 'z'"));
    let before = body(&b);
    let after = body(&peephole_pass(&b));
    assert!(before.windows(2).any(|w| w == [Peek, Pop]), "{before:?}");
    assert!(!after.windows(2).any(|w| w == [Peek, Pop]));
    assert_eq!(before.len() - after.len(), after.iter().filter(|&&o| o == PeekPop).count());
}

#[test]
fn repeated_choice_flow_reduction() {
    let plain = block("A = ('a' / 'b')*");
    assert_eq!(
        body(&plain),
        [Push, Push, Char, IfFail, Pop, Jump, Peek, Pop, Succ, Char, IfFail, Nop, Pop, Jump, Peek, Pop, Succ, Ret]
    );
    let flowed = flow_pass(&plain);
    assert_eq!(
        body(&flowed),
        [Push, Char, IfFail, Jump, Peek, Succ, Char, IfFail, Pop, Jump, Peek, Pop, Succ, Ret]
    );
    // the loop re-enters at its single save
    let back = flowed.instructions().iter().rposition(|i| matches!(i, Instruction::Jump(_))).unwrap();
    let Instruction::Jump(l) = flowed.instructions()[back] else { unreachable!() };
    assert_eq!(flowed.target(l), 2);
}
