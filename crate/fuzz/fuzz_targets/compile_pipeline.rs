#![no_main]

//! Input: pass mask byte, grammar text, a zero byte, then the parser input.
//! Any grammar that validates must compile, roundtrip through the encoder
//! and agree with the interpreter.

use libfuzzer_sys::fuzz_target;
use pegvm::bytecode::{decode, encode, link};
use pegvm::compiler::{check_failure_discipline, compile_grammar, stack_depths};
use pegvm::grammar::{interpret_with_limit, parse_grammar, validate_grammar};
use pegvm::optimizer::{optimize, OptimizationConfig};
use pegvm::vm::{run, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Some((&bits, rest)) = data.split_first() else { return };
    let split = rest.iter().position(|&b| b == 0).unwrap_or(rest.len());
    let Ok(text) = std::str::from_utf8(&rest[..split]) else { return };
    let input = rest.get(split + 1..).unwrap_or(&[]);
    let Ok(g) = parse_grammar(text) else { return };
    if !validate_grammar(&g).is_empty() {
        return;
    }
    let plain = compile_grammar(&g).expect("valid grammar compiles");
    let block = optimize(&g, &OptimizationConfig::from_bits(bits & 31)).expect("valid grammar optimizes");
    assert!(block.len() <= plain.len());
    stack_depths(&block).expect("balanced");
    check_failure_discipline(&block).expect("disciplined");
    let Ok(p) = link(&block) else { return };
    if let Ok(bytes) = encode(&block) {
        assert_eq!(decode(&bytes).expect("own image decodes"), p);
    }

    // bound the work: exponential backtracking is legal PEG behaviour
    let budget = RunConfig::default().with_stack_slots(1 << 14).with_step_limit(200_000);
    let Ok(plain_p) = link(&plain) else { return };
    if run(&plain_p, input, &budget).error.is_some() {
        return;
    }
    let r = run(&p, input, &budget.with_step_limit(800_000).strict());
    assert_eq!(r.error, None);
    let want = interpret_with_limit(&g, input, 0, 1 << 14).expect("oracle");
    assert_eq!((r.matched, r.consumed), (want.matched, if want.matched { want.end_pos } else { 0 }));
});
