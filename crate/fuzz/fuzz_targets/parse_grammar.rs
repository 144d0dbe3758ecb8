#![no_main]

use libfuzzer_sys::fuzz_target;
use pegvm::grammar::{parse_grammar, validate_grammar};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = parse_grammar(text) else { return };
    // printing and reparsing gives the same grammar
    let again = parse_grammar(&g.to_source()).expect("printed grammar reparses");
    assert_eq!(again, g);
    let _ = validate_grammar(&g);
});
