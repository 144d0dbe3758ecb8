//! Size-reducing passes, applied in a fixed order: inlining on the grammar,
//! then flow cleanup, peephole, lexical and unary specialization on code.
//!
//! Every pass preserves the matched flag and the consumed length of every
//! successful parse. Positions left behind by failed tests are not
//! preserved: failure always reaches a `peek` (or the final `exit`, where the
//! position is not reported) before the position is read again.

mod flow;
mod inline;
mod lexical;
mod peephole;
pub(crate) mod rewrite;
mod unary;

use std::fmt;
use std::str::FromStr;

use crate::compiler::{compile_grammar, CodeBlock, CompileError};
use crate::grammar::Grammar;

pub use flow::flow_pass;
pub use inline::{inline_pass, trial_size, INLINE_LIMIT};
pub use lexical::lexical_pass;
pub use peephole::peephole_pass;
pub use unary::unary_pass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pass {
    Inline,
    Flow,
    Peephole,
    Lexical,
    Unary,
}

impl Pass {
    pub const ORDER: [Pass; 5] = [Pass::Inline, Pass::Flow, Pass::Peephole, Pass::Lexical, Pass::Unary];

    pub fn name(self) -> &'static str {
        match self {
            Pass::Inline => "inline",
            Pass::Flow => "flow",
            Pass::Peephole => "peephole",
            Pass::Lexical => "lex",
            Pass::Unary => "unary",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which passes run. Order is always that of [`Pass::ORDER`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptimizationConfig {
    pub inline: bool,
    pub flow: bool,
    pub peephole: bool,
    pub lexical: bool,
    pub unary: bool,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self::all()
    }
}

impl OptimizationConfig {
    pub fn all() -> Self {
        OptimizationConfig {
            inline: true,
            flow: true,
            peephole: true,
            lexical: true,
            unary: true,
        }
    }

    pub fn none() -> Self {
        OptimizationConfig {
            inline: false,
            flow: false,
            peephole: false,
            lexical: false,
            unary: false,
        }
    }

    pub fn only(passes: &[Pass]) -> Self {
        let mut c = Self::none();
        for &p in passes {
            c.set(p, true);
        }
        c
    }

    /// The first `n` passes of [`Pass::ORDER`].
    pub fn prefix(n: usize) -> Self {
        Self::only(&Pass::ORDER[..n.min(5)])
    }

    /// Config from a bit mask, bit `k` enabling `Pass::ORDER[k]`.
    pub fn from_bits(bits: u8) -> Self {
        let passes: Vec<Pass> = (0..5).filter(|k| bits & (1 << k) != 0).map(|k| Pass::ORDER[k]).collect();
        Self::only(&passes)
    }

    pub fn enabled(&self, p: Pass) -> bool {
        match p {
            Pass::Inline => self.inline,
            Pass::Flow => self.flow,
            Pass::Peephole => self.peephole,
            Pass::Lexical => self.lexical,
            Pass::Unary => self.unary,
        }
    }

    pub fn set(&mut self, p: Pass, on: bool) {
        match p {
            Pass::Inline => self.inline = on,
            Pass::Flow => self.flow = on,
            Pass::Peephole => self.peephole = on,
            Pass::Lexical => self.lexical = on,
            Pass::Unary => self.unary = on,
        }
    }
}

impl fmt::Display for OptimizationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on: Vec<&str> = Pass::ORDER.iter().filter(|p| self.enabled(**p)).map(|p| p.name()).collect();
        match on.len() {
            0 => f.write_str("none"),
            5 => f.write_str("all"),
            _ => f.write_str(&on.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown optimization `{0}` (expected none, all, or a list of inline, flow, peephole, lex, unary)")]
pub struct UnknownPass(pub String);

impl FromStr for OptimizationConfig {
    type Err = UnknownPass;

    fn from_str(s: &str) -> Result<Self, UnknownPass> {
        match s.trim() {
            "none" | "" => return Ok(Self::none()),
            "all" => return Ok(Self::all()),
            _ => {}
        }
        let mut c = Self::none();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let p = match part {
                "inline" => Pass::Inline,
                "flow" => Pass::Flow,
                "peephole" => Pass::Peephole,
                "lex" | "lexical" => Pass::Lexical,
                "unary" => Pass::Unary,
                other => return Err(UnknownPass(other.to_string())),
            };
            c.set(p, true);
        }
        Ok(c)
    }
}

/// Runs the enabled code passes on an already compiled block.
pub fn optimize_code(block: &CodeBlock, cfg: &OptimizationConfig) -> CodeBlock {
    let mut b = rewrite::compact(block.clone());
    if cfg.flow {
        b = flow_pass(&b);
    }
    if cfg.peephole {
        b = peephole_pass(&b);
    }
    if cfg.lexical {
        b = lexical_pass(&b);
    }
    if cfg.unary {
        b = unary_pass(&b);
    }
    b
}

/// Compiles `g` with the enabled passes.
pub fn optimize(g: &Grammar, cfg: &OptimizationConfig) -> Result<CodeBlock, CompileError> {
    let block = if cfg.inline {
        compile_grammar(&inline_pass(g))?
    } else {
        compile_grammar(g)?
    };
    Ok(optimize_code(&block, cfg))
}

/// Instruction counts of the plain translation and of each cumulative pass
/// prefix (inline, +flow, +peephole, +lex, +unary).
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CumulativeSizes {
    pub plain: usize,
    pub inline: usize,
    pub flow: usize,
    pub peephole: usize,
    pub lexical: usize,
    pub unary: usize,
}

impl CumulativeSizes {
    pub fn as_array(&self) -> [usize; 6] {
        [self.plain, self.inline, self.flow, self.peephole, self.lexical, self.unary]
    }
}

pub fn cumulative_sizes(g: &Grammar) -> Result<CumulativeSizes, CompileError> {
    let plain = compile_grammar(g)?;
    let inlined = compile_grammar(&inline_pass(g))?;
    let flow = flow_pass(&inlined);
    let peep = peephole_pass(&flow);
    let lex = lexical_pass(&peep);
    let unary = unary_pass(&lex);
    Ok(CumulativeSizes {
        plain: plain.len(),
        inline: inlined.len(),
        flow: flow.len(),
        peephole: peep.len(),
        lexical: lex.len(),
        unary: unary.len(),
    })
}
