//! Lowering of a typed program to one closed lambda term.
//!
//! The stages run in this order: removal of unreachable code, literal
//! expansion, pattern compilation, Scott encoding of data, recursion via
//! `Y`, and let elimination.

mod core;
mod encode;
mod ir;
mod patterns;
mod prune;

use thiserror::Error;

pub use self::core::{fresh_name, CoreTerm};
pub use encode::{eliminate_let, encode_data, resolve_recursion, scott_ctor};
pub use ir::{fresh_ir_name, Ir, SimpleProgram};
pub use patterns::{compile_patterns, first_matching_clause};
pub use prune::{prune_unused, replace_literals};

use crate::prim::PrimOp;
use crate::syntax::Span;
use crate::typecheck::TypedProgram;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LowerError {
    #[error("{span}: literal of type `{ty}` is not supported")]
    UnsupportedLiteralType { span: Span, ty: String },
    #[error("{span}: integer literal {value} does not fit in 64 signed bits")]
    LiteralOutOfRange { span: Span, value: u64 },
    #[error("{span}: unknown primitive `#{name}`")]
    UnknownPrimitive { span: Span, name: String },
    #[error("{span}: non-exhaustive patterns")]
    NonExhaustive { span: Span },
    #[error("conditionals and comparisons need `data Bool = False | True`")]
    MissingBool,
    #[error("unbound name `{name}` after lowering")]
    UnboundName { name: String },
    #[error("internal lowering error: {0}")]
    Internal(String),
}

impl LowerError {
    pub fn span(&self) -> Option<&Span> {
        match self {
            LowerError::UnsupportedLiteralType { span, .. }
            | LowerError::LiteralOutOfRange { span, .. }
            | LowerError::UnknownPrimitive { span, .. }
            | LowerError::NonExhaustive { span } => Some(span),
            _ => None,
        }
    }
}

/// Runs the whole lowering pipeline on a type-checked, coverage-checked
/// program and returns the closed term denoting `main`.
pub fn lower(p: &TypedProgram) -> Result<CoreTerm, LowerError> {
    let pruned = prune_unused(p);
    check_bool(&pruned)?;
    let literal_free = replace_literals(&pruned)?;
    let simple = compile_patterns(&literal_free)?;
    let encoded = encode_data(&simple);
    let ordered = resolve_recursion(&encoded);
    eliminate_let(&ordered)
}

/// Comparison primitives produce the encodings of `False` and `True` as
/// the first and second constructor, so a user-declared `Bool` must agree.
fn check_bool(p: &TypedProgram) -> Result<(), LowerError> {
    let Some(b) = p.data.get("Bool") else {
        return Ok(());
    };
    let canonical = b.ctors == ["False", "True"] && b.ctors.iter().all(|c| p.ctors[c].arity() == 0);
    if canonical || !uses_comparison(p) {
        Ok(())
    } else {
        Err(LowerError::MissingBool)
    }
}

fn uses_comparison(p: &TypedProgram) -> bool {
    use crate::syntax::{Term, TermKind};
    fn walk(t: &Term) -> bool {
        match &t.kind {
            TermKind::Prim(n) => PrimOp::from_name(n).is_some_and(PrimOp::returns_bool),
            TermKind::App(a, b) => walk(a) || walk(b),
            TermKind::Lam(_, b) => walk(b),
            TermKind::If(c, a, b) => walk(c) || walk(a) || walk(b),
            TermKind::Case(s, bs) => walk(s) || bs.iter().any(|b| walk(&b.body)),
            TermKind::Let(bs, body) => bs.iter().any(|b| walk(&b.body)) || walk(body),
            TermKind::Var(_) | TermKind::Ctor(_) | TermKind::Lit(_) => false,
        }
    }
    p.program
        .bindings
        .iter()
        .flat_map(|b| &b.clauses)
        .any(|c| walk(&c.body))
}
