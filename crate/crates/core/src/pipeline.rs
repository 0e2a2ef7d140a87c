//! The whole front end in one place: load, infer, check coverage, lower
//! and compile.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kvy::{compile_core, KvyError, KvyTerm};
use crate::lower::{lower, CoreTerm, LowerError};
use crate::syntax::{
    lex, load_program, load_source, parse_expr, Clause, FunDef, LoadError, Span, SurfaceProgram,
};
use crate::typecheck::{check_coverage, infer, CoverageError, TypeError, TypedProgram};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Coverage(Vec<CoverageError>),
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error("{0}")]
    Kvy(#[from] KvyError),
}

impl PipelineError {
    pub fn span(&self) -> Option<&Span> {
        match self {
            PipelineError::Load(e) => e.span(),
            PipelineError::Type(e) => Some(e.span()),
            PipelineError::Coverage(es) => es.first().map(|e| &e.span),
            PipelineError::Lower(e) => e.span(),
            PipelineError::Kvy(_) => None,
        }
    }
}

/// A checked program with its lowered and compiled forms.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub program: TypedProgram,
    pub core: CoreTerm,
    pub kvy: KvyTerm,
}

/// Type and coverage checking of a loaded program.
pub fn check(program: &SurfaceProgram) -> Result<TypedProgram, PipelineError> {
    let typed = infer(program)?;
    let errors = check_coverage(&typed);
    if errors.is_empty() {
        Ok(typed)
    } else {
        Err(PipelineError::Coverage(errors))
    }
}

pub fn check_file(path: &Path, search: &[PathBuf]) -> Result<TypedProgram, PipelineError> {
    check(&load_program(path, search)?)
}

pub fn check_source(
    file: &str,
    source: &str,
    search: &[PathBuf],
) -> Result<TypedProgram, PipelineError> {
    check(&load_source(file, source, search)?)
}

pub fn compile(program: TypedProgram) -> Result<Compiled, PipelineError> {
    let core = lower(&program)?;
    let kvy = compile_core(&core)?;
    Ok(Compiled { program, core, kvy })
}

/// Compiles program text with no imports beyond the prelude.
pub fn compile_source(source: &str) -> Result<Compiled, PipelineError> {
    compile(check_source("Main.lm", source, &[])?)
}

/// A copy of `program` whose entry point is the expression `expr`, bound
/// to a fresh name. Used to evaluate interactive input in the scope of a
/// loaded program.
pub fn with_entry_expr(
    program: &SurfaceProgram,
    file: &str,
    expr: &str,
) -> Result<SurfaceProgram, PipelineError> {
    let body = parse_expr(lex(file, expr).map_err(LoadError::from)?).map_err(LoadError::from)?;
    let mut name = "it".to_string();
    while program.binding(&name).is_some() {
        name.push('\'');
    }
    let span = body.span.clone();
    let mut out = program.clone();
    out.bindings.push(FunDef {
        name: name.clone(),
        annotation: None,
        clauses: vec![Clause {
            patterns: Vec::new(),
            body,
            span: span.clone(),
        }],
        span,
    });
    out.entry = name;
    Ok(out)
}
