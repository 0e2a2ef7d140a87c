//! Translation of clause groups and nested patterns into depth-one cases.
//!
//! The match compiler works column-wise: it takes the leftmost constructor
//! pattern of the first remaining row and splits on that column, giving
//! every constructor of the type a branch. Rows whose pattern in the column
//! is a variable or wildcard are copied into every branch, which keeps the
//! top-down first-match order.

use std::collections::HashMap;

use super::ir::{fresh_ir_name, Ir, SimpleProgram};
use super::LowerError;
use crate::prim::PrimOp;
use crate::syntax::*;
use crate::typecheck::{LiteralType, TypedProgram};

pub fn compile_patterns(p: &TypedProgram) -> Result<SimpleProgram, LowerError> {
    let mut cx = Matcher {
        p,
        next: 0,
        env: Vec::new(),
    };
    let mut bindings = Vec::new();
    for def in &p.program.bindings {
        bindings.push((def.name.clone(), cx.fun(def)?));
    }
    Ok(SimpleProgram {
        bindings,
        entry: p.program.entry.clone(),
        ctors: p.ctors.clone(),
        data: p.data.clone(),
        next_fresh: cx.next,
    })
}

struct Matcher<'a> {
    p: &'a TypedProgram,
    next: usize,
    /// Source name to generated name, innermost last.
    env: Vec<(String, String)>,
}

#[derive(Clone, Copy)]
enum Col<'t> {
    Wild,
    Pat(&'t Pattern),
}

#[derive(Clone)]
struct Row<'t> {
    cols: Vec<Col<'t>>,
    binds: Vec<(String, String)>,
    body: &'t Term,
}

impl<'a> Matcher<'a> {
    fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        fresh_ir_name(base, self.next)
    }

    fn fun(&mut self, def: &FunDef) -> Result<Ir, LowerError> {
        if def.arity() == 0 {
            return self.term(&def.clauses[0].body);
        }
        let args: Vec<String> = (0..def.arity()).map(|_| self.fresh("arg")).collect();
        let rows = def
            .clauses
            .iter()
            .map(|c| Row {
                cols: c.patterns.iter().map(Col::Pat).collect(),
                binds: Vec::new(),
                body: &c.body,
            })
            .collect();
        let body = self.matrix(&args, rows, &def.span)?;
        Ok(Ir::lams(&args, body))
    }

    fn matrix(
        &mut self,
        occs: &[String],
        mut rows: Vec<Row<'_>>,
        span: &Span,
    ) -> Result<Ir, LowerError> {
        let Some(first) = rows.first() else {
            return Err(LowerError::NonExhaustive { span: span.clone() });
        };
        let split = first
            .cols
            .iter()
            .position(|c| matches!(c, Col::Pat(Pattern::Ctor(..))));
        let Some(col) = split else {
            let mut row = rows.swap_remove(0);
            for (c, occ) in row.cols.iter().zip(occs) {
                if let Col::Pat(Pattern::Var(v, _)) = c {
                    row.binds.push((v.clone(), occ.clone()));
                }
            }
            let depth = self.env.len();
            self.env.extend(row.binds);
            let body = self.term(row.body);
            self.env.truncate(depth);
            return body;
        };
        let Col::Pat(Pattern::Ctor(c0, _, _)) = first.cols[col] else {
            unreachable!()
        };
        let data = self.p.ctors[c0].data.clone();
        let ctor_names = self.p.data[&data].ctors.clone();
        let mut branches = Vec::new();
        for c in &ctor_names {
            let arity = self.p.ctors[c].arity();
            let fields: Vec<String> = (0..arity).map(|_| self.fresh("field")).collect();
            let mut sub = Vec::new();
            for row in &rows {
                let mut cols = row.cols[..col].to_vec();
                let mut binds = row.binds.clone();
                match row.cols[col] {
                    Col::Pat(Pattern::Ctor(d, ps, _)) => {
                        if d != c {
                            continue;
                        }
                        cols.extend(ps.iter().map(Col::Pat));
                    }
                    Col::Pat(Pattern::Var(v, _)) => {
                        binds.push((v.clone(), occs[col].clone()));
                        cols.extend(std::iter::repeat_n(Col::Wild, arity));
                    }
                    Col::Pat(Pattern::Wildcard(_)) | Col::Wild => {
                        cols.extend(std::iter::repeat_n(Col::Wild, arity))
                    }
                }
                cols.extend_from_slice(&row.cols[col + 1..]);
                sub.push(Row {
                    cols,
                    binds,
                    body: row.body,
                });
            }
            let mut sub_occs = occs[..col].to_vec();
            sub_occs.extend(fields.iter().cloned());
            sub_occs.extend_from_slice(&occs[col + 1..]);
            let body = self.matrix(&sub_occs, sub, span)?;
            branches.push((fields, body));
        }
        Ok(Ir::Case(
            Box::new(Ir::Var(occs[col].clone())),
            data,
            branches,
        ))
    }

    fn lookup(&self, v: &str) -> String {
        self.env
            .iter()
            .rev()
            .find(|(s, _)| s == v)
            .map_or_else(|| v.to_string(), |(_, g)| g.clone())
    }

    fn term(&mut self, t: &Term) -> Result<Ir, LowerError> {
        Ok(match &t.kind {
            TermKind::Var(v) => Ir::Var(self.lookup(v)),
            TermKind::Ctor(c) => Ir::Ctor(c.clone()),
            TermKind::Prim(name) => match PrimOp::from_name(name) {
                Some(op) => Ir::Prim(op.id()),
                None => {
                    return Err(LowerError::UnknownPrimitive {
                        span: t.span.clone(),
                        name: name.clone(),
                    })
                }
            },
            TermKind::Lit(n) => match self.p.literals.get(&t.span.key()) {
                Some(LiteralType::Int) => {
                    Ir::Int(
                        i64::try_from(*n).map_err(|_| LowerError::LiteralOutOfRange {
                            span: t.span.clone(),
                            value: *n,
                        })?,
                    )
                }
                Some(LiteralType::Nat) => {
                    let Some((succ, zero)) = self.p.nat_ctors() else {
                        return Err(LowerError::UnsupportedLiteralType {
                            span: t.span.clone(),
                            ty: "Nat".into(),
                        });
                    };
                    (0..*n).fold(Ir::Ctor(zero), |acc, _| {
                        Ir::app(Ir::Ctor(succ.clone()), acc)
                    })
                }
                None => {
                    return Err(LowerError::UnsupportedLiteralType {
                        span: t.span.clone(),
                        ty: "unknown".into(),
                    })
                }
            },
            TermKind::App(f, a) => Ir::app(self.term(f)?, self.term(a)?),
            TermKind::Lam(x, b) => {
                let g = self.fresh(x);
                self.env.push((x.clone(), g.clone()));
                let body = self.term(b);
                self.env.pop();
                Ir::Lam(g, Box::new(body?))
            }
            TermKind::If(c, a, b) => {
                let bool_ctors = &self
                    .p
                    .data
                    .get("Bool")
                    .ok_or(LowerError::MissingBool)?
                    .ctors;
                let cond = self.term(c)?;
                let mut branches = Vec::new();
                for name in bool_ctors {
                    let arm = match name.as_str() {
                        "True" => self.term(a)?,
                        "False" => self.term(b)?,
                        _ => return Err(LowerError::MissingBool),
                    };
                    branches.push((Vec::new(), arm));
                }
                Ir::Case(Box::new(cond), "Bool".into(), branches)
            }
            TermKind::Case(s, branches) => {
                let rows: Vec<Row<'_>> = branches
                    .iter()
                    .map(|b| Row {
                        cols: vec![Col::Pat(&b.pattern)],
                        binds: Vec::new(),
                        body: &b.body,
                    })
                    .collect();
                if let TermKind::Var(v) = &s.kind {
                    let occ = self.lookup(v);
                    self.matrix(&[occ], rows, &t.span)?
                } else {
                    let scrutinee = self.term(s)?;
                    let occ = self.fresh("scrut");
                    let body = self.matrix(std::slice::from_ref(&occ), rows, &t.span)?;
                    Ir::Let(vec![(occ, scrutinee)], Box::new(body))
                }
            }
            TermKind::Let(bs, body) => {
                let defs = group_let_bindings(bs);
                let depth = self.env.len();
                let names: Vec<String> = defs.iter().map(|d| self.fresh(&d.name)).collect();
                for (d, g) in defs.iter().zip(&names) {
                    self.env.push((d.name.clone(), g.clone()));
                }
                let mut group = Vec::new();
                for (d, g) in defs.iter().zip(names) {
                    group.push((g, self.fun(d)?));
                }
                let body = self.term(body);
                self.env.truncate(depth);
                Ir::Let(group, Box::new(body?))
            }
        })
    }
}

/// Reference semantics for tests: the clause a top-down matcher picks.
pub fn first_matching_clause<'c>(
    clauses: &'c [Clause],
    ctor_of: &dyn Fn(usize) -> Option<(String, Vec<usize>)>,
    args: &[usize],
) -> Option<(&'c Clause, HashMap<String, usize>)> {
    fn matches(
        p: &Pattern,
        v: usize,
        ctor_of: &dyn Fn(usize) -> Option<(String, Vec<usize>)>,
        out: &mut HashMap<String, usize>,
    ) -> bool {
        match p {
            Pattern::Var(x, _) => {
                out.insert(x.clone(), v);
                true
            }
            Pattern::Wildcard(_) => true,
            Pattern::Ctor(c, ps, _) => match ctor_of(v) {
                Some((d, fields)) if &d == c && fields.len() == ps.len() => ps
                    .iter()
                    .zip(fields)
                    .all(|(p, f)| matches(p, f, ctor_of, out)),
                _ => false,
            },
        }
    }
    clauses.iter().find_map(|c| {
        let mut env = HashMap::new();
        c.patterns
            .iter()
            .zip(args)
            .all(|(p, v)| matches(p, *v, ctor_of, &mut env))
            .then_some((c, env))
    })
}
