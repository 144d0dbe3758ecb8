//! A compiler from parsing expression grammars to a compact fixed-width
//! bytecode, a size-reducing optimizer, and a parsing machine that runs the
//! bytecode with a small bounded stack.
//!
//! ```
//! use pegvm::{bytecode, compiler, grammar, vm};
//!
//! let g = grammar::parse_grammar("File = Line*\nLine = [a-z]+ '\\n'").unwrap();
//! let block = compiler::compile_grammar(&g).unwrap();
//! let program = bytecode::decode(&bytecode::encode(&block).unwrap()).unwrap();
//! let r = vm::run(&program, b"ab\ncd\n", &vm::RunConfig::default());
//! assert!(r.matched);
//! assert_eq!(r.consumed, 6);
//! ```

pub mod bytecode;
pub mod charset;
pub mod cli;
pub mod compiler;
pub mod corpus;
pub mod grammar;
pub mod optimizer;
pub mod vm;
