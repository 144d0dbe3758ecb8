//! Prints code-section bytes of the corpus grammars after each cumulative
//! pass prefix.

use pegvm::grammar::parse_grammar;
use pegvm::optimizer::cumulative_sizes;

fn main() {
    println!("{:<6} {:>6} {:>6} {:>6} {:>8} {:>6} {:>6} {:>6}", "", "plain", "inline", "flow", "peephole", "lex", "unary", "ratio");
    for (name, src) in pegvm::corpus::GRAMMARS {
        let s = cumulative_sizes(&parse_grammar(src).expect("corpus grammar")).expect("valid");
        let b = s.as_array().map(|n| 2 * n);
        println!(
            "{name:<6} {:>6} {:>6} {:>6} {:>8} {:>6} {:>6} {:>5.0}%",
            b[0],
            b[1],
            b[2],
            b[3],
            b[4],
            b[5],
            100.0 * b[5] as f64 / b[0] as f64
        );
    }
}
