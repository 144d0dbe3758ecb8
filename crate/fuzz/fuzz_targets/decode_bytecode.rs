#![no_main]

use libfuzzer_sys::fuzz_target;
use pegvm::bytecode::{decode, disassemble};

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = decode(data) {
        assert_eq!(p.image_bytes(), data.len());
        assert_eq!(disassemble(&p).lines().count(), p.code.len());
    }
});
