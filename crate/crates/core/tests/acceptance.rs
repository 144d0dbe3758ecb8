//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use common::{random_block, random_grammar, random_input, tractable_inputs, SCREEN_STEPS};
use pegvm::bytecode::{decode, disassemble, encode, link, Program, HEADER_BYTES};
use pegvm::compiler::{check_failure_discipline, compile_grammar, CodeBlock, Instruction, Opcode};
use pegvm::corpus::{self, generate};
use pegvm::grammar::{interpret, parse_grammar, Grammar};
use pegvm::optimizer::{cumulative_sizes, flow_pass, optimize, peephole_pass, OptimizationConfig};
use pegvm::vm::{run, ParseResult, RunConfig, RunError};
use rand::rngs::StdRng;
use rand::SeedableRng;

type Outcome = Result<String, String>;

/// Strict-mode runs made by criteria 1 to 4, and how many hit the
/// failure-discipline check.
static STRICT_RUNS: AtomicU64 = AtomicU64::new(0);
static DISCIPLINE_HITS: AtomicU64 = AtomicU64::new(0);

fn strict_run(p: &Program, input: &[u8], cfg: RunConfig) -> ParseResult {
    let r = run(p, input, &cfg.strict());
    STRICT_RUNS.fetch_add(1, Ordering::Relaxed);
    if matches!(r.error, Some(RunError::Discipline { .. })) {
        DISCIPLINE_HITS.fetch_add(1, Ordering::Relaxed);
    }
    r
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn image(g: &Grammar, opt: &OptimizationConfig) -> Program {
    decode(&encode(&optimize(g, opt).unwrap()).unwrap()).unwrap()
}

fn grammar(src: &str) -> Grammar {
    parse_grammar(src).unwrap()
}

fn expected(g: &Grammar, input: &[u8]) -> (bool, usize) {
    let r = interpret(g, input, 0).unwrap();
    (r.matched, if r.matched { r.end_pos } else { 0 })
}

/// Checks all 32 pass subsets of `g` on `inputs`; returns the number of
/// (subset, input) runs.
fn agree_everywhere(g: &Grammar, inputs: &[Vec<u8>], cfg: RunConfig) -> Result<usize, String> {
    let want: Vec<(bool, usize)> = inputs.iter().map(|i| expected(g, i)).collect();
    let mut runs = 0;
    for bits in 0..32u8 {
        let opt = OptimizationConfig::from_bits(bits);
        let block = optimize(g, &opt).map_err(|e| e.to_string())?;
        let p = link(&block).map_err(|e| e.to_string())?;
        for (input, want) in inputs.iter().zip(&want) {
            let r = strict_run(&p, input, cfg);
            runs += 1;
            ensure(r.error.is_none() && (r.matched, r.consumed) == *want, || {
                format!(
                    "opt={opt}: vm {:?}/{}/{:?} vs oracle {want:?} on {:?} for\n{}",
                    r.matched,
                    r.consumed,
                    r.error,
                    String::from_utf8_lossy(input),
                    g.to_source()
                )
            })?;
        }
    }
    Ok(runs)
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let cfg = RunConfig::default().with_stack_slots(1 << 16).with_step_limit(4 * SCREEN_STEPS);
    let mut rng = StdRng::seed_from_u64(0xACCE_0001);
    let (mut pairs, mut grammars, mut runs) = (0, 0, 0);
    while pairs < 1000 {
        let s = random_grammar(&mut rng);
        let inputs = (0..4).map(|_| random_input(&mut rng, &s.alphabet)).collect();
        let inputs = tractable_inputs(&s.grammar, inputs);
        runs += agree_everywhere(&s.grammar, &inputs, cfg)?;
        pairs += inputs.len();
        grammars += 1;
    }
    let cfg = RunConfig::default().with_step_limit(5_000_000).with_stack_slots(4096);
    let mut corpus_pairs = 0;
    for (name, src) in corpus::GRAMMARS {
        let g = grammar(src);
        let inputs: Vec<Vec<u8>> = (0..4)
            .map(|seed| corpus::sample_input(name, 2000, seed).unwrap())
            .chain([b"".to_vec(), b"\x00garbage".to_vec()])
            .collect();
        runs += agree_everywhere(&g, &inputs, cfg).map_err(|e| format!("{name}: {e}"))?;
        corpus_pairs += inputs.len();
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "{pairs} random pairs over {grammars} grammars + {corpus_pairs} corpus pairs, 32 pass subsets, {runs} runs in {elapsed:.1?}"
    ))
}

fn size_reduction() -> Outcome {
    let mut parts = Vec::new();
    for (name, src) in corpus::GRAMMARS {
        let g = grammar(src);
        let sizes = cumulative_sizes(&g).map_err(|e| e.to_string())?.as_array().map(|n| 2 * n);
        ensure(sizes.windows(2).all(|w| w[0] >= w[1]), || format!("{name} sizes rise: {sizes:?}"))?;
        let full = image(&g, &OptimizationConfig::all()).code_bytes();
        ensure(full == sizes[5], || format!("{name}: image {full} vs {}", sizes[5]))?;
        let ratio = full as f64 / sizes[0] as f64;
        ensure(ratio <= 0.60, || format!("{name}: {full}/{} = {:.0}%", sizes[0], 100.0 * ratio))?;
        parts.push(format!("{name} {}->{} ({:.0}%)", sizes[0], full, 100.0 * ratio));
    }
    Ok(parts.join(", "))
}

fn stack_independence() -> Outcome {
    let csv = image(&grammar(corpus::CSV), &OptimizationConfig::all());
    let cfg = RunConfig::default();
    let small = strict_run(&csv, &generate::csv_rows(10, 5, 1), cfg);
    let large = strict_run(&csv, &generate::csv_rows(10_000, 5, 1), cfg);
    ensure(small.matched && large.matched, || format!("csv: {small:?} {large:?}"))?;
    ensure(small.max_stack_depth == large.max_stack_depth, || {
        format!("csv depth {} vs {}", small.max_stack_depth, large.max_stack_depth)
    })?;

    let json = image(&grammar(corpus::JSON), &OptimizationConfig::all());
    let depth = |d: usize| {
        let input = generate::json_nested(d, 9);
        let r = strict_run(&json, &input, cfg);
        if r.matched && r.consumed == input.len() {
            Ok(r.max_stack_depth)
        } else {
            Err(format!("json depth {d}: {r:?}"))
        }
    };
    let (d1, d5, d10) = (depth(1)?, depth(5)?, depth(10)?);
    ensure(d5 > d1 && (d5 - d1) * 5 == (d10 - d5) * 4, || format!("json depths {d1}, {d5}, {d10}"))?;
    let per_level = (d5 - d1) / 4;

    let big = generate::csv_of_size(1 << 20, 4);
    let r = strict_run(&csv, &big, RunConfig::default().with_stack_slots(512));
    ensure(r.matched && r.consumed == big.len() && r.error.is_none(), || format!("1 MB csv: {r:?}"))?;
    Ok(format!(
        "csv depth {} at 10 and 10000 rows; json depth {d1}/{d5}/{d10} at nesting 1/5/10 (+{per_level} per level); {} byte csv in 512 slots (peak {})",
        small.max_stack_depth,
        big.len(),
        r.max_stack_depth
    ))
}

fn recursion() -> Outcome {
    let g = grammar("A = 'a' A / ''");
    let mut notes = Vec::new();
    for opt in [OptimizationConfig::none(), OptimizationConfig::all()] {
        let p = image(&g, &opt);
        let cfg = RunConfig::default().with_stack_slots(1 << 12);
        let mut depths = Vec::new();
        for n in [0usize, 5, 100] {
            let r = strict_run(&p, &vec![b'a'; n], cfg);
            ensure(r.matched && r.consumed == n, || format!("opt={opt} n={n}: {r:?}"))?;
            depths.push(r.max_stack_depth);
        }
        let (d0, d5, d100) = (depths[0], depths[1], depths[2]);
        ensure(d5 > d0 && (d5 - d0) * 20 == d100 - d0, || format!("opt={opt}: depths {depths:?}"))?;
        let r = strict_run(&p, &[b'a'; 100], RunConfig::default().with_stack_slots(8));
        ensure(r.error == Some(RunError::StackOverflow) && !r.matched, || format!("opt={opt} 8 slots: {r:?}"))?;
        notes.push(format!("{opt}: depth {d0}+{}n", (d5 - d0) / 5));
    }
    Ok(format!("n=0,5,100 matched; {}; 8 slots overflow", notes.join(", ")))
}

fn golden_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn encoding() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xACCE_0005);
    for k in 0..500 {
        let block = random_block(&mut rng);
        let bytes = encode(&block).map_err(|e| format!("block {k}: {e}"))?;
        let p = decode(&bytes).map_err(|e| format!("block {k}: {e}"))?;
        let pools: usize = p.strings.iter().map(|s| 1 + s.len()).sum::<usize>() + 32 * p.bitmaps.len();
        ensure(bytes.len() == HEADER_BYTES + 2 * block.len() + pools, || format!("block {k}: size"))?;
        ensure(p == link(&block).unwrap(), || format!("block {k}: roundtrip differs"))?;
    }
    for name in ["csv", "json", "xml"] {
        let g = grammar(corpus::grammar(name).unwrap());
        let first = disassemble(&image(&g, &OptimizationConfig::all()));
        let second = disassemble(&image(&g, &OptimizationConfig::all()));
        let golden = std::fs::read_to_string(golden_dir().join(format!("{name}.txt"))).map_err(|e| e.to_string())?;
        ensure(first == second && first == golden, || format!("{name} disassembly differs from golden"))?;
    }
    Ok("500 random blocks roundtrip at 2 bytes/instruction; csv/json/xml disassembly matches golden".into())
}

fn body(b: &CodeBlock) -> Vec<Opcode> {
    b.opcodes()[2..b.len() - 1].to_vec()
}

fn specialization() -> Outcome {
    use Opcode::*;
    let not_c = compile_grammar(&grammar("A = !'c'")).unwrap();
    ensure(body(&not_c).len() == 10, || format!("plain !'c' is {:?}", body(&not_c)))?;
    let out = optimize(&grammar("A = !'c'"), &OptimizationConfig::all()).unwrap();
    ensure(
        body(&out) == [NChar, IfFail] && out.instructions()[2] == Instruction::NChar(b'c'),
        || format!("!'c' became {:?}", body(&out)),
    )?;

    let choice = flow_pass(&compile_grammar(&grammar("A = ('x' / 'y') 'z'")).unwrap());
    let fused = peephole_pass(&choice);
    ensure(body(&choice).windows(2).any(|w| w == [Peek, Pop]), || format!("{:?}", body(&choice)))?;
    let fused_body = body(&fused);
    ensure(
        !fused_body.windows(2).any(|w| w == [Peek, Pop]) && fused_body.contains(&PeekPop),
        || format!("peek;pop survived: {fused_body:?}"),
    )?;

    let star = compile_grammar(&grammar("A = ('a' / 'b')*")).unwrap();
    let flowed = flow_pass(&star);
    let want = [Push, Char, IfFail, Jump, Peek, Succ, Char, IfFail, Pop, Jump, Peek, Pop, Succ];
    ensure(body(&flowed) == want, || format!("('a'/'b')* after flow: {:?}", body(&flowed)))?;
    Ok(format!(
        "!'c' {}->{}; peek;pop fused; ('a'/'b')* {}->{} after flow",
        body(&not_c).len(),
        body(&out).len(),
        body(&star).len(),
        body(&flowed).len()
    ))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Rounds of single timed runs, each round visiting every size, so a slow
/// stretch of the machine lands on all sizes instead of one.
const ROUNDS: usize = 11;

fn throughput() -> Outcome {
    let g = grammar(corpus::CSV);
    let opt = OptimizationConfig::all();
    let cfg = RunConfig::default();
    let inputs: Vec<Vec<u8>> = [2usize << 20, 4 << 20, 8 << 20]
        .iter()
        .map(|&n| {
            let mut v = generate::csv_of_size(n, 7);
            v.truncate(n);
            let cut = v.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            v.truncate(cut);
            v
        })
        .collect();
    let mut times = vec![Vec::new(); inputs.len()];
    for _ in 0..ROUNDS {
        for (k, input) in inputs.iter().enumerate() {
            let r = pegvm::cli::bench("csv", &g, input, 1, &opt, &cfg).map_err(|e| e.to_string())?;
            ensure(r.matched && r.consumed == input.len(), || format!("size {k}: not fully matched"))?;
            times[k].push(r.median_secs);
        }
    }
    let medians: Vec<f64> = times.into_iter().map(median).collect();
    let ratios: Vec<f64> = medians.windows(2).map(|w| w[1] / w[0]).collect();
    let text = format!(
        "medians of {ROUNDS} {} for 2/4/8 MiB, ratios {}",
        medians.iter().map(|m| format!("{:.1}ms", m * 1e3)).collect::<Vec<_>>().join("/"),
        ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
    );
    ensure(ratios.iter().all(|r| (1.5..=2.5).contains(r)), || text.clone())?;
    Ok(text)
}

fn failure_discipline() -> Outcome {
    for (name, src) in corpus::GRAMMARS {
        let g = grammar(src);
        for bits in 0..32u8 {
            let block = optimize(&g, &OptimizationConfig::from_bits(bits)).unwrap();
            check_failure_discipline(&block).map_err(|e| format!("{name} {bits:05b}: {e}"))?;
        }
    }
    let runs = STRICT_RUNS.load(Ordering::Relaxed);
    let hits = DISCIPLINE_HITS.load(Ordering::Relaxed);
    ensure(runs > 0 && hits == 0, || format!("{hits} of {runs} strict runs hit the check"))?;
    Ok(format!("0 of {runs} strict runs from criteria 1-4 tripped; static check clean on corpus x 32 subsets"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("code-size reduction", size_reduction),
        ("stack independence", stack_independence),
        ("recursion", recursion),
        ("encoding bit-exactness", encoding),
        ("specialization spot-checks", specialization),
        ("csv throughput linearity", throughput),
        ("failure discipline", failure_discipline),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
