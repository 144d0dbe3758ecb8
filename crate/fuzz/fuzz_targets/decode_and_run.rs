#![no_main]

//! Input: image length (u16 LE), image, then the parser input.

use libfuzzer_sys::fuzz_target;
use pegvm::bytecode::decode;
use pegvm::vm::{run, RunConfig};

fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let n = u16::from_le_bytes([data[0], data[1]]) as usize;
    let rest = &data[2..];
    let (image, input) = rest.split_at(n.min(rest.len()));
    let Ok(p) = decode(image) else { return };
    let cfg = RunConfig::default().with_stack_slots(256).with_step_limit(100_000);
    let a = run(&p, input, &cfg);
    assert!(a.consumed <= input.len());
    assert!(a.max_stack_depth <= 256);
    assert!(!(a.matched && a.error.is_some()));
    assert_eq!(run(&p, input, &cfg), a);
});
