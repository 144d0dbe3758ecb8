use super::{CodeBlock, Instruction, Label};
use crate::grammar::{validate_grammar, Diagnostic, Expression, Grammar};

/// Instruction sink with label allocation.
#[derive(Debug, Default)]
pub struct Emitter {
    code: Vec<Instruction>,
    labels: Vec<Option<usize>>,
}

impl Emitter {
    pub fn new() -> Self {
        Emitter::default()
    }

    pub fn new_label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() as u32 - 1)
    }

    /// Binds `label` to the next emitted instruction.
    pub fn bind(&mut self, label: Label) {
        let slot = &mut self.labels[label.0 as usize];
        assert!(slot.is_none(), "label L{} bound twice", label.0);
        *slot = Some(self.code.len());
    }

    pub fn emit(&mut self, ins: Instruction) {
        self.code.push(ins);
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Index a bound label points at.
    pub fn bound(&self, label: Label) -> Option<usize> {
        self.labels[label.0 as usize]
    }

    fn finish(self) -> (Vec<Instruction>, Vec<usize>) {
        let labels = self
            .labels
            .into_iter()
            .map(|l| l.expect("every label is bound"))
            .collect();
        (self.code, labels)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("grammar is not compilable: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// Emits code for `e` that branches to `fail` when `e` does not match.
pub fn compile_expression(e: &Expression, fail: Label, em: &mut Emitter) {
    match e {
        Expression::Empty => em.emit(Instruction::Nop),
        Expression::Char(c) => {
            em.emit(Instruction::Char(*c));
            em.emit(Instruction::IfFail(fail));
        }
        Expression::Any => {
            em.emit(Instruction::Any);
            em.emit(Instruction::IfFail(fail));
        }
        Expression::NonTerminal(name) => {
            em.emit(Instruction::Call(name.clone()));
            em.emit(Instruction::IfFail(fail));
        }
        Expression::Literal(bytes) => {
            for &b in bytes {
                em.emit(Instruction::Char(b));
                em.emit(Instruction::IfFail(fail));
            }
        }
        Expression::Class(set) => {
            let alts: Vec<Expression> = set.iter().map(Expression::Char).collect();
            compile_choice(&alts, fail, em);
        }
        Expression::Sequence(items) => {
            for item in items {
                compile_expression(item, fail, em);
            }
        }
        Expression::Choice(alts) => compile_choice(alts, fail, em),
        Expression::Optional(inner) => {
            // push; e; pop; jump L''; L': peek; pop; succ; L'': nop
            let retry = em.new_label();
            let done = em.new_label();
            em.emit(Instruction::Push);
            compile_expression(inner, retry, em);
            em.emit(Instruction::Pop);
            em.emit(Instruction::Jump(done));
            em.bind(retry);
            em.emit(Instruction::Peek);
            em.emit(Instruction::Pop);
            em.emit(Instruction::Succ);
            em.bind(done);
            em.emit(Instruction::Nop);
        }
        Expression::ZeroOrMore(inner) => {
            // L1: push; e; pop; jump L1; L2: peek; pop; succ
            let top = em.new_label();
            let exit = em.new_label();
            em.bind(top);
            em.emit(Instruction::Push);
            compile_expression(inner, exit, em);
            em.emit(Instruction::Pop);
            em.emit(Instruction::Jump(top));
            em.bind(exit);
            em.emit(Instruction::Peek);
            em.emit(Instruction::Pop);
            em.emit(Instruction::Succ);
        }
        Expression::And(inner) => {
            // push; e; L': peek; pop; iffail L
            let after = em.new_label();
            em.emit(Instruction::Push);
            compile_expression(inner, after, em);
            em.bind(after);
            em.emit(Instruction::Peek);
            em.emit(Instruction::Pop);
            em.emit(Instruction::IfFail(fail));
        }
        Expression::Not(inner) => {
            // push; e; peek; pop; fail; jump L; L': peek; pop; succ
            let absent = em.new_label();
            em.emit(Instruction::Push);
            compile_expression(inner, absent, em);
            em.emit(Instruction::Peek);
            em.emit(Instruction::Pop);
            em.emit(Instruction::Fail);
            em.emit(Instruction::Jump(fail));
            em.bind(absent);
            em.emit(Instruction::Peek);
            em.emit(Instruction::Pop);
            em.emit(Instruction::Succ);
        }
    }
}

/// `e1 / e2 / ... / en` as nested binary choices `e1 / (e2 / (... / en))`.
fn compile_choice(alts: &[Expression], fail: Label, em: &mut Emitter) {
    let (first, rest) = match alts {
        [] => unreachable!("choice without alternatives"),
        [only] => return compile_expression(only, fail, em),
        [first, rest @ ..] => (first, rest),
    };
    let retry = em.new_label();
    let done = em.new_label();
    em.emit(Instruction::Push);
    compile_expression(first, retry, em);
    em.emit(Instruction::Pop);
    em.emit(Instruction::Jump(done));
    em.bind(retry);
    em.emit(Instruction::Peek);
    em.emit(Instruction::Pop);
    em.emit(Instruction::Succ);
    compile_choice(rest, fail, em);
    em.bind(done);
    em.emit(Instruction::Nop);
}

/// Compiles a validated grammar into a linked code block:
///
/// ```text
///     call <start>
///     exit
/// A:  <code for A's body, failing to LA>
/// LA: ret
///     ...
/// ```
///
/// A failing body returns with the failure flag set and the caller's
/// `iffail` takes the branch.
pub fn compile_grammar(g: &Grammar) -> Result<CodeBlock, CompileError> {
    let diags = validate_grammar(g);
    if !diags.is_empty() {
        return Err(CompileError::Invalid(diags));
    }
    let mut em = Emitter::new();
    em.emit(Instruction::Call(g.start().to_string()));
    em.emit(Instruction::Exit);
    let mut entries = Vec::with_capacity(g.len());
    for p in g.productions() {
        let entry = em.new_label();
        let fail = em.new_label();
        em.bind(entry);
        compile_expression(&p.body, fail, &mut em);
        em.bind(fail);
        em.emit(Instruction::Ret);
        entries.push((p.name.clone(), entry));
    }
    let (code, labels) = em.finish();
    let block = CodeBlock {
        code,
        labels,
        entries,
        start: g.start().to_string(),
    };
    debug_assert!(super::stack_depths(&block).is_ok());
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::Opcode::{self, *};
    use crate::grammar::parse_grammar;

    fn tau(e: &Expression) -> (Vec<Instruction>, Emitter, Label) {
        let mut em = Emitter::new();
        let fail = em.new_label();
        compile_expression(e, fail, &mut em);
        (em.instructions().to_vec(), em, fail)
    }

    fn ops(code: &[Instruction]) -> Vec<Opcode> {
        code.iter().map(Instruction::opcode).collect()
    }

    #[test]
    fn char_and_empty() {
        let (code, _, l) = tau(&Expression::Char(b'a'));
        assert_eq!(code, vec![Instruction::Char(b'a'), Instruction::IfFail(l)]);
        let (code, _, _) = tau(&Expression::Empty);
        assert_eq!(code, vec![Instruction::Nop]);
        let (code, _, l) = tau(&Expression::Any);
        assert_eq!(code, vec![Instruction::Any, Instruction::IfFail(l)]);
    }

    #[test]
    fn not_char_is_ten_instructions() {
        let (code, em, l) = tau(&Expression::not(Expression::Char(b'c')));
        assert_eq!(
            ops(&code),
            vec![Push, Char, IfFail, Peek, Pop, Fail, Jump, Peek, Pop, Succ]
        );
        assert_eq!(code[6], Instruction::Jump(l));
        // the inner failure branch lands on the restoring peek
        let inner = code[2].label().unwrap();
        assert_eq!(em.bound(inner), Some(7));
    }

    #[test]
    fn choice_shape() {
        let e = Expression::Choice(vec![Expression::Char(b'a'), Expression::Char(b'b')]);
        let (code, em, l) = tau(&e);
        assert_eq!(
            ops(&code),
            vec![Push, Char, IfFail, Pop, Jump, Peek, Pop, Succ, Char, IfFail, Nop]
        );
        assert_eq!(em.bound(code[2].label().unwrap()), Some(5));
        assert_eq!(em.bound(code[4].label().unwrap()), Some(10));
        assert_eq!(code[9], Instruction::IfFail(l));
    }

    #[test]
    fn star_and_option_shapes() {
        let (code, em, l) = tau(&Expression::star(Expression::Char(b'a')));
        assert_eq!(ops(&code), vec![Push, Char, IfFail, Pop, Jump, Peek, Pop, Succ]);
        assert_eq!(em.bound(code[4].label().unwrap()), Some(0));
        assert_eq!(em.bound(code[2].label().unwrap()), Some(5));
        assert!(!code.contains(&Instruction::IfFail(l)), "e* never fails");

        let (code, _, _) = tau(&Expression::optional(Expression::Char(b'a')));
        assert_eq!(ops(&code), vec![Push, Char, IfFail, Pop, Jump, Peek, Pop, Succ, Nop]);

        let (code, _, l) = tau(&Expression::and(Expression::Char(b'a')));
        assert_eq!(ops(&code), vec![Push, Char, IfFail, Peek, Pop, IfFail]);
        assert_eq!(code[5], Instruction::IfFail(l));
    }

    #[test]
    fn literal_and_class_plain_forms() {
        let (code, _, _) = tau(&Expression::Literal(b"Jan".to_vec()));
        assert_eq!(ops(&code), vec![Char, IfFail, Char, IfFail, Char, IfFail]);
        let digits = Expression::Class(crate::charset::ByteSet::from_range(b'0', b'9'));
        let (code, _, _) = tau(&digits);
        // nine full alternatives, a final char test, nine join points
        assert_eq!(code.len(), 9 * 8 + 2 + 9);
        let single = Expression::Class(crate::charset::ByteSet::from_bytes([b'x']));
        assert_eq!(ops(&tau(&single).0), vec![Char, IfFail]);
    }

    #[test]
    fn single_production_grammar() {
        let block = compile_grammar(&parse_grammar("A = 'a'").unwrap()).unwrap();
        assert_eq!(
            block.instructions(),
            &[
                Instruction::Call("A".into()),
                Instruction::Exit,
                Instruction::Char(b'a'),
                Instruction::IfFail(Label(1)),
                Instruction::Ret,
            ]
        );
        assert_eq!(block.entry("A"), Some(2));
        assert_eq!(block.target(Label(1)), 4);

        let block = compile_grammar(&parse_grammar("A = ''").unwrap()).unwrap();
        assert_eq!(block.opcodes(), vec![Call, Exit, Nop, Ret]);
    }

    #[test]
    fn invalid_grammar_is_rejected() {
        let err = compile_grammar(&parse_grammar("A = B").unwrap()).unwrap_err();
        assert!(err.to_string().contains("UNRESOLVED(B)"));
    }
}
