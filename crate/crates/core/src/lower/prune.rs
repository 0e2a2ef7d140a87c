use std::collections::{HashMap, HashSet, VecDeque};

use super::LowerError;
use crate::prim::PrimOp;
use crate::syntax::*;
use crate::typecheck::{LiteralType, TypedProgram, BUILTIN_TYPES};

/// Keeps only the bindings reachable from the entry point and the data
/// types whose constructors those bindings use. A kept data type keeps all
/// of its constructors so that its encoding is unchanged.
pub fn prune_unused(p: &TypedProgram) -> TypedProgram {
    let index: HashMap<&str, usize> = p
        .program
        .bindings
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name.as_str(), i))
        .collect();
    let mut live = vec![false; p.program.bindings.len()];
    let mut queue = VecDeque::new();
    if let Some(&i) = index.get(p.program.entry.as_str()) {
        live[i] = true;
        queue.push_back(i);
    }
    while let Some(i) = queue.pop_front() {
        for v in p.program.bindings[i].free_vars() {
            if let Some(&j) = index.get(v.as_str()) {
                if !live[j] {
                    live[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }

    let bindings: Vec<FunDef> = p
        .program
        .bindings
        .iter()
        .zip(&live)
        .filter(|(_, l)| **l)
        .map(|(b, _)| b.clone())
        .collect();

    let mut used = UsedCtors {
        ctors: HashSet::new(),
        literals: &p.literals,
        nat: false,
        bool_: false,
    };
    for b in &bindings {
        for c in &b.clauses {
            c.patterns.iter().for_each(|pat| used.pattern(pat));
            used.term(&c.body);
        }
    }
    let mut keep_types: HashSet<String> = used
        .ctors
        .iter()
        .filter_map(|c| p.ctors.get(c))
        .map(|i| i.data.clone())
        .collect();
    if used.nat {
        keep_types.insert("Nat".into());
    }
    if used.bool_ {
        keep_types.insert("Bool".into());
    }
    keep_types.extend(BUILTIN_TYPES.iter().map(|s| s.to_string()));

    let mut out = p.clone();
    out.program.bindings = bindings;
    out.program.data.retain(|d| keep_types.contains(&d.name));
    out.data.retain(|n, _| keep_types.contains(n));
    out.ctors.retain(|_, c| keep_types.contains(&c.data));
    out.schemes
        .retain(|n, _| out.program.bindings.iter().any(|b| &b.name == n));
    out
}

struct UsedCtors<'a> {
    ctors: HashSet<String>,
    literals: &'a HashMap<SpanKey, LiteralType>,
    nat: bool,
    bool_: bool,
}

impl UsedCtors<'_> {
    fn pattern(&mut self, p: &Pattern) {
        if let Pattern::Ctor(c, ps, _) = p {
            self.ctors.insert(c.clone());
            ps.iter().for_each(|p| self.pattern(p));
        }
    }

    fn term(&mut self, t: &Term) {
        match &t.kind {
            TermKind::Var(_) => {}
            TermKind::Ctor(c) => {
                self.ctors.insert(c.clone());
            }
            TermKind::Prim(name) => {
                if PrimOp::from_name(name).is_some_and(PrimOp::returns_bool) {
                    self.bool_ = true;
                }
            }
            TermKind::Lit(_) => {
                if self.literals.get(&t.span.key()) == Some(&LiteralType::Nat) {
                    self.nat = true;
                }
            }
            TermKind::App(a, b) => {
                self.term(a);
                self.term(b);
            }
            TermKind::Lam(_, b) => self.term(b),
            TermKind::If(c, a, b) => {
                self.bool_ = true;
                self.term(c);
                self.term(a);
                self.term(b);
            }
            TermKind::Case(s, branches) => {
                self.term(s);
                for b in branches {
                    self.pattern(&b.pattern);
                    self.term(&b.body);
                }
            }
            TermKind::Let(bs, body) => {
                for b in bs {
                    b.patterns.iter().for_each(|p| self.pattern(p));
                    self.term(&b.body);
                }
                self.term(body);
            }
        }
    }
}

/// Rewrites every `Nat` literal `n` into `n` applications of the successor
/// to zero. `Int` literals are left for the later stages, which turn them
/// into integer leaves.
pub fn replace_literals(p: &TypedProgram) -> Result<TypedProgram, LowerError> {
    let mut out = p.clone();
    let nat = p.nat_ctors();
    for b in &mut out.program.bindings {
        for c in &mut b.clauses {
            rewrite(&mut c.body, &p.literals, nat.as_ref())?;
        }
    }
    Ok(out)
}

fn rewrite(
    t: &mut Term,
    literals: &HashMap<SpanKey, LiteralType>,
    nat: Option<&(String, String)>,
) -> Result<(), LowerError> {
    match &mut t.kind {
        TermKind::Lit(n) => match literals.get(&t.span.key()) {
            Some(LiteralType::Int) => {
                if *n > i64::MAX as u64 {
                    return Err(LowerError::LiteralOutOfRange {
                        span: t.span.clone(),
                        value: *n,
                    });
                }
            }
            Some(LiteralType::Nat) => {
                let Some((succ, zero)) = nat else {
                    return Err(LowerError::UnsupportedLiteralType {
                        span: t.span.clone(),
                        ty: "Nat".into(),
                    });
                };
                let span = t.span.clone();
                let mut value = Term::new(TermKind::Ctor(zero.clone()), span.clone());
                for _ in 0..*n {
                    value = Term::app(Term::new(TermKind::Ctor(succ.clone()), span.clone()), value);
                }
                *t = value;
            }
            None => {
                return Err(LowerError::UnsupportedLiteralType {
                    span: t.span.clone(),
                    ty: "unknown".into(),
                })
            }
        },
        TermKind::Var(_) | TermKind::Ctor(_) | TermKind::Prim(_) => {}
        TermKind::App(a, b) => {
            rewrite(a, literals, nat)?;
            rewrite(b, literals, nat)?;
        }
        TermKind::Lam(_, b) => rewrite(b, literals, nat)?,
        TermKind::If(c, a, b) => {
            rewrite(c, literals, nat)?;
            rewrite(a, literals, nat)?;
            rewrite(b, literals, nat)?;
        }
        TermKind::Case(s, branches) => {
            rewrite(s, literals, nat)?;
            for b in branches {
                rewrite(&mut b.body, literals, nat)?;
            }
        }
        TermKind::Let(bs, body) => {
            for b in bs {
                rewrite(&mut b.body, literals, nat)?;
            }
            rewrite(body, literals, nat)?;
        }
    }
    Ok(())
}
