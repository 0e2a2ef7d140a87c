//! Surface syntax tree for LambdaM.

use std::fmt;
use std::sync::Arc;

/// Source position of a token or tree node.
///
/// Spans are metadata: two spans always compare equal so that trees parsed
/// from differently formatted sources can be compared structurally. Use
/// [`Span::key`] when a position must identify something.
#[derive(Clone, Debug, Default)]
pub struct Span {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(file: Arc<str>, line: u32, col: u32) -> Self {
        Span { file, line, col }
    }

    pub fn key(&self) -> SpanKey {
        SpanKey(self.file.clone(), self.line, self.col)
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

/// Hashable identity of a source position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanKey(pub Arc<str>, pub u32, pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExpr {
    Var(String),
    Con(String, Vec<TypeExpr>),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String, Span),
    Wildcard(Span),
    Ctor(String, Vec<Pattern>, Span),
}

impl Pattern {
    pub fn span(&self) -> &Span {
        match self {
            Pattern::Var(_, s) | Pattern::Wildcard(s) | Pattern::Ctor(_, _, s) => s,
        }
    }

    /// Variables bound by this pattern, left to right.
    pub fn binders(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v, _) => out.push(v.clone()),
            Pattern::Wildcard(_) => {}
            Pattern::Ctor(_, ps, _) => ps.iter().for_each(|p| p.binders(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    Var(String),
    App(Box<Term>, Box<Term>),
    Lam(String, Box<Term>),
    Let(Vec<LetBinding>, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Case(Box<Term>, Vec<Branch>),
    Ctor(String),
    Prim(String),
    Lit(u64),
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Self {
        Term { kind, span }
    }

    pub fn app(f: Term, a: Term) -> Self {
        let span = f.span.clone();
        Term::new(TermKind::App(Box::new(f), Box::new(a)), span)
    }
}

/// One clause of a `let` group, with the annotation that preceded it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetBinding {
    pub name: String,
    pub patterns: Vec<Pattern>,
    pub annotation: Option<TypeExpr>,
    pub body: Term,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub pattern: Pattern,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: String,
    pub fields: Vec<TypeExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecl {
    pub name: String,
    pub params: Vec<String>,
    pub ctors: Vec<CtorDecl>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunClause {
    pub name: String,
    pub patterns: Vec<Pattern>,
    pub body: Term,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeAnnotation {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Data(DataDecl),
    Clause(FunClause),
    Annotation(TypeAnnotation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Import {
    pub module: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModule {
    pub name: String,
    pub imports: Vec<Import>,
    pub decls: Vec<Decl>,
}

/// Clauses of one function, grouped and with the annotation attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub annotation: Option<TypeExpr>,
    pub clauses: Vec<Clause>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub patterns: Vec<Pattern>,
    pub body: Term,
    pub span: Span,
}

impl FunDef {
    pub fn arity(&self) -> usize {
        self.clauses.first().map_or(0, |c| c.patterns.len())
    }
}

/// A loaded program: every module merged into one namespace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub data: Vec<DataDecl>,
    pub bindings: Vec<FunDef>,
    pub entry: String,
    /// Entry file, used for diagnostics that have no better location.
    pub origin: Span,
}

impl SurfaceProgram {
    pub fn binding(&self, name: &str) -> Option<&FunDef> {
        self.bindings.iter().find(|b| b.name == name)
    }
}

/// Groups adjacent `let` clauses with the same name into functions.
pub fn group_let_bindings(bindings: &[LetBinding]) -> Vec<FunDef> {
    let mut defs: Vec<FunDef> = Vec::new();
    for b in bindings {
        let clause = Clause {
            patterns: b.patterns.clone(),
            body: b.body.clone(),
            span: b.span.clone(),
        };
        match defs.last_mut() {
            Some(d) if d.name == b.name => {
                d.clauses.push(clause);
                if d.annotation.is_none() {
                    d.annotation = b.annotation.clone();
                }
            }
            _ => defs.push(FunDef {
                name: b.name.clone(),
                annotation: b.annotation.clone(),
                clauses: vec![clause],
                span: b.span.clone(),
            }),
        }
    }
    defs
}

impl Term {
    /// Variables occurring free in the term, each reported once.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }
}

impl FunDef {
    /// Free variables of all clauses (pattern variables bound).
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.clauses {
            let mut bound = Vec::new();
            c.patterns.iter().for_each(|p| p.binders(&mut bound));
            collect_free(&c.body, &mut bound, &mut out);
        }
        out
    }
}

fn collect_free(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match &t.kind {
        TermKind::Var(v) => {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        TermKind::Ctor(_) | TermKind::Prim(_) | TermKind::Lit(_) => {}
        TermKind::App(f, a) => {
            collect_free(f, bound, out);
            collect_free(a, bound, out);
        }
        TermKind::Lam(v, b) => {
            bound.push(v.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        TermKind::If(c, a, b) => {
            collect_free(c, bound, out);
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        TermKind::Case(s, branches) => {
            collect_free(s, bound, out);
            for b in branches {
                let depth = bound.len();
                b.pattern.binders(bound);
                collect_free(&b.body, bound, out);
                bound.truncate(depth);
            }
        }
        TermKind::Let(bindings, body) => {
            let depth = bound.len();
            bound.extend(bindings.iter().map(|b| b.name.clone()));
            for b in bindings {
                let inner = bound.len();
                b.patterns.iter().for_each(|p| p.binders(bound));
                collect_free(&b.body, bound, out);
                bound.truncate(inner);
            }
            collect_free(body, bound, out);
            bound.truncate(depth);
        }
    }
}
