//! Command-line front end.
//!
//! Every subcommand exits 0 on success (or a match), 1 on a mismatch and 2
//! on any error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::builder::RangedU64ValueParser;
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::bytecode::{decode, disassemble, encode, Program};
use crate::grammar::{parse_grammar, Grammar};
use crate::optimizer::{cumulative_sizes, optimize, CumulativeSizes, OptimizationConfig};
use crate::vm::{run, ParseResult, RunConfig, DEFAULT_STACK_SLOTS};

pub const EXIT_MATCH: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "pegvm", version, about = "Compile PEGs to compact bytecode and run them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a grammar to a bytecode image.
    Compile {
        grammar: PathBuf,
        /// Output image; defaults to the grammar path with a `.pvb` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// none, all, or a comma list of inline, flow, peephole, lex, unary.
        #[arg(long, default_value = "all")]
        opt: OptimizationConfig,
        /// Print the code-section size in bytes.
        #[arg(long)]
        dump_size: bool,
    },
    /// Run a bytecode image on an input file.
    Run {
        image: PathBuf,
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STACK_SLOTS, value_parser = RangedU64ValueParser::<usize>::new().range(2..))]
        stack_slots: usize,
        /// Instruction budget; defaults to 64 per input byte plus 4096.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        step_limit: Option<u64>,
        /// Write a one-line JSON report to standard error.
        #[arg(long)]
        stats: bool,
        /// Source grammar, used only to fill the size fields of the report.
        #[arg(long)]
        grammar: Option<PathBuf>,
    },
    /// Disassemble a bytecode image.
    Dump { image: PathBuf },
    /// Compile a grammar and time repeated runs on an input.
    Bench {
        grammar: PathBuf,
        input: PathBuf,
        #[arg(short = 'n', long, default_value_t = 5, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
        repetitions: usize,
        #[arg(long, default_value = "all")]
        opt: OptimizationConfig,
        #[arg(long, default_value_t = DEFAULT_STACK_SLOTS, value_parser = RangedU64ValueParser::<usize>::new().range(2..))]
        stack_slots: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        step_limit: Option<u64>,
    },
}

/// Code-section bytes of each cumulative pass prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PassBytes {
    pub inline: usize,
    pub flow: usize,
    pub peephole: usize,
    pub lexical: usize,
    pub unary: usize,
}

/// The `--stats` record. Keys are always present; fields that cannot be
/// known (grammar data when only an image is given) are `null`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub grammar: Option<String>,
    pub productions: Option<usize>,
    pub plain_code_bytes: Option<usize>,
    pub reduced_code_bytes: Option<PassBytes>,
    pub code_bytes: usize,
    pub input_bytes: usize,
    pub matched: bool,
    pub consumed: usize,
    pub max_stack_slots: usize,
    pub max_stack_bytes: usize,
    pub steps: u64,
    pub wall_time_secs: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub grammar: String,
    pub input_bytes: usize,
    pub code_bytes: usize,
    pub repetitions: usize,
    pub matched: bool,
    pub consumed: usize,
    pub mean_secs: f64,
    pub median_secs: f64,
    pub min_secs: f64,
    /// Input bytes per second at the mean time.
    pub throughput: f64,
    pub times_secs: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// `message` starts with the `line:col` of the error.
    #[error("{path}:{message}")]
    Parse {
        path: PathBuf,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{0}")]
    Message(String),
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and parses a grammar file.
pub fn load_grammar(path: &Path) -> Result<Grammar, CliError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Message(format!("{}: {e}", path.display())))?;
    parse_grammar(&text).map_err(|e| {
        let (line, col) = e.location();
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            col,
            message: e.to_string(),
        }
    })
}

/// Reads and decodes a bytecode image.
pub fn load_image(path: &Path) -> Result<Program, CliError> {
    decode(&read(path)?).map_err(|e| CliError::Message(format!("{}: {e}", path.display())))
}

fn grammar_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Optimizes and encodes a grammar into an image.
pub fn compile_image(g: &Grammar, opt: &OptimizationConfig) -> Result<Vec<u8>, CliError> {
    let block = optimize(g, opt).map_err(|e| CliError::Message(e.to_string()))?;
    encode(&block).map_err(|e| CliError::Message(e.to_string()))
}

fn size_fields(g: &Grammar) -> Result<(usize, PassBytes), CliError> {
    let s: CumulativeSizes = cumulative_sizes(g).map_err(|e| CliError::Message(e.to_string()))?;
    let bytes = |n: usize| 2 * n;
    Ok((
        bytes(s.plain),
        PassBytes {
            inline: bytes(s.inline),
            flow: bytes(s.flow),
            peephole: bytes(s.peephole),
            lexical: bytes(s.lexical),
            unary: bytes(s.unary),
        },
    ))
}

/// Builds the `--stats` record for one run.
pub fn stats_report(
    program: &Program,
    input_len: usize,
    result: &ParseResult,
    wall_time_secs: f64,
    grammar: Option<(&str, &Grammar)>,
) -> Result<StatsReport, CliError> {
    let (name, productions, plain, reduced) = match grammar {
        Some((name, g)) => {
            let (plain, reduced) = size_fields(g)?;
            (Some(name.to_string()), Some(g.len()), Some(plain), Some(reduced))
        }
        None => (None, None, None, None),
    };
    Ok(StatsReport {
        grammar: name,
        productions,
        plain_code_bytes: plain,
        reduced_code_bytes: reduced,
        code_bytes: program.code_bytes(),
        input_bytes: input_len,
        matched: result.matched,
        consumed: result.consumed,
        max_stack_slots: result.max_stack_depth,
        max_stack_bytes: result.max_stack_bytes(),
        steps: result.steps,
        wall_time_secs,
        error: result.error.map(|e| e.to_string()),
    })
}

/// Compiles `grammar` and times `repetitions` runs on `input`.
pub fn bench(
    name: &str,
    g: &Grammar,
    input: &[u8],
    repetitions: usize,
    opt: &OptimizationConfig,
    cfg: &RunConfig,
) -> Result<BenchReport, CliError> {
    let program = decode(&compile_image(g, opt)?).map_err(|e| CliError::Message(e.to_string()))?;
    let mut times = Vec::with_capacity(repetitions);
    let mut last = None;
    for _ in 0..repetitions.max(1) {
        let t = Instant::now();
        let r = run(&program, input, cfg);
        times.push(t.elapsed().as_secs_f64());
        if let Some(e) = r.error {
            return Err(CliError::Message(e.to_string()));
        }
        last = Some(r);
    }
    let r = last.expect("at least one run");
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    Ok(BenchReport {
        grammar: name.to_string(),
        input_bytes: input.len(),
        code_bytes: program.code_bytes(),
        repetitions: times.len(),
        matched: r.matched,
        consumed: r.consumed,
        mean_secs: mean,
        median_secs: median,
        min_secs: sorted[0],
        throughput: if mean > 0.0 { input.len() as f64 / mean } else { 0.0 },
        times_secs: times,
    })
}

fn run_config(stack_slots: usize, step_limit: Option<u64>) -> RunConfig {
    RunConfig {
        stack_slots,
        step_limit,
        strict: false,
    }
}

fn match_code(matched: bool) -> i32 {
    if matched {
        EXIT_MATCH
    } else {
        EXIT_MISMATCH
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let io = |e: std::io::Error| CliError::Message(e.to_string());
    match cmd {
        Command::Compile {
            grammar,
            output,
            opt,
            dump_size,
        } => {
            let g = load_grammar(&grammar)?;
            let image = compile_image(&g, &opt)?;
            let output = output.unwrap_or_else(|| grammar.with_extension("pvb"));
            std::fs::write(&output, &image).map_err(|source| CliError::Io {
                path: output.clone(),
                source,
            })?;
            if dump_size {
                let program = decode(&image).map_err(|e| CliError::Message(e.to_string()))?;
                writeln!(out, "{}", program.code_bytes()).map_err(io)?;
            }
            Ok(EXIT_MATCH)
        }
        Command::Run {
            image,
            input,
            stack_slots,
            step_limit,
            stats,
            grammar,
        } => {
            let program = load_image(&image)?;
            let source = grammar.as_deref().map(|p| load_grammar(p).map(|g| (grammar_name(p), g))).transpose()?;
            let data = read(&input)?;
            let t = Instant::now();
            let r = run(&program, &data, &run_config(stack_slots, step_limit));
            let secs = t.elapsed().as_secs_f64();
            if stats {
                let named = source.as_ref().map(|(n, g)| (n.as_str(), g));
                let report = stats_report(&program, data.len(), &r, secs, named)?;
                let line = serde_json::to_string(&report).map_err(|e| CliError::Message(e.to_string()))?;
                writeln!(err, "{line}").map_err(io)?;
            }
            if let Some(e) = r.error {
                writeln!(err, "error: {e}").map_err(io)?;
                return Ok(EXIT_ERROR);
            }
            Ok(match_code(r.matched))
        }
        Command::Dump { image } => {
            let program = load_image(&image)?;
            out.write_all(disassemble(&program).as_bytes()).map_err(io)?;
            Ok(EXIT_MATCH)
        }
        Command::Bench {
            grammar,
            input,
            repetitions,
            opt,
            stack_slots,
            step_limit,
        } => {
            let g = load_grammar(&grammar)?;
            let data = read(&input)?;
            let cfg = run_config(stack_slots, step_limit);
            let report = bench(&grammar_name(&grammar), &g, &data, repetitions, &opt, &cfg)?;
            let line = serde_json::to_string(&report).map_err(|e| CliError::Message(e.to_string()))?;
            writeln!(out, "{line}").map_err(io)?;
            Ok(match_code(report.matched))
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_MATCH };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
