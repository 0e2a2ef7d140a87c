//! Exhaustiveness and redundancy of pattern matches, using the usefulness
//! relation on pattern matrices.

use std::fmt;

use super::infer::{CtorInfo, TypedProgram};
use crate::syntax::*;

use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageError {
    pub span: Span,
    /// Function name, or `case` for case expressions.
    pub subject: String,
    /// A value shape (one pattern per argument) no clause matches.
    pub witness: Vec<Witness>,
}

impl fmt::Display for CoverageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<String> = self.witness.iter().map(|w| w.to_string_atomic()).collect();
        write!(
            f,
            "{}: non-exhaustive patterns in `{}`: missing `{}`",
            self.span,
            self.subject,
            shown.join(" ")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundancyWarning {
    pub span: Span,
    pub subject: String,
}

impl fmt::Display for RedundancyWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: warning: unreachable clause in `{}`",
            self.span, self.subject
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Any,
    Ctor(String, Vec<Witness>),
}

impl Witness {
    fn to_string_atomic(&self) -> String {
        match self {
            Witness::Ctor(_, args) if !args.is_empty() => format!("({self})"),
            Witness::Ctor(c, _) => c.clone(),
            Witness::Any => "_".into(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Any => f.write_str("_"),
            Witness::Ctor(c, args) => {
                f.write_str(c)?;
                for a in args {
                    write!(f, " {}", a.to_string_atomic())?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverageReport {
    pub errors: Vec<CoverageError>,
    pub warnings: Vec<RedundancyWarning>,
}

/// Non-exhaustive matches in the program (empty when every match is total).
pub fn check_coverage(p: &TypedProgram) -> Vec<CoverageError> {
    coverage_report(p).errors
}

pub fn coverage_report(p: &TypedProgram) -> CoverageReport {
    let mut cx = Checker {
        sig: Signature::new(p),
        report: CoverageReport::default(),
    };
    for f in &p.program.bindings {
        cx.fun(f);
    }
    cx.report
}

/// Constructor lookup used by the matrix algorithms.
pub struct Signature<'a> {
    ctors: &'a HashMap<String, CtorInfo>,
    siblings: HashMap<&'a str, &'a [String]>,
}

impl<'a> Signature<'a> {
    pub fn new(p: &'a TypedProgram) -> Self {
        let siblings = p
            .data
            .values()
            .map(|d| (d.name.as_str(), d.ctors.as_slice()))
            .collect();
        Signature {
            ctors: &p.ctors,
            siblings,
        }
    }

    fn arity(&self, c: &str) -> usize {
        self.ctors[c].arity()
    }

    fn all_ctors(&self, c: &str) -> &'a [String] {
        self.siblings[self.ctors[c].data.as_str()]
    }
}

/// Simplified pattern: variables and wildcards coincide.
#[derive(Clone, Debug)]
enum Pat {
    Any,
    Ctor(String, Vec<Pat>),
}

fn simplify(p: &Pattern) -> Pat {
    match p {
        Pattern::Var(..) | Pattern::Wildcard(_) => Pat::Any,
        Pattern::Ctor(c, ps, _) => Pat::Ctor(c.clone(), ps.iter().map(simplify).collect()),
    }
}

fn specialize(rows: &[Vec<Pat>], c: &str, arity: usize) -> Vec<Vec<Pat>> {
    rows.iter()
        .filter_map(|row| {
            let (head, tail) = row.split_first()?;
            let mut out = match head {
                Pat::Any => vec![Pat::Any; arity],
                Pat::Ctor(d, args) if d == c => args.clone(),
                Pat::Ctor(..) => return None,
            };
            out.extend_from_slice(tail);
            Some(out)
        })
        .collect()
}

fn default_matrix(rows: &[Vec<Pat>]) -> Vec<Vec<Pat>> {
    rows.iter()
        .filter(|row| matches!(row[0], Pat::Any))
        .map(|row| row[1..].to_vec())
        .collect()
}

fn head_ctors(rows: &[Vec<Pat>]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for row in rows {
        if let Some(Pat::Ctor(c, _)) = row.first() {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
    }
    out
}

impl Signature<'_> {
    /// A vector of `n` values matched by no row, if one exists.
    fn missing(&self, rows: &[Vec<Pat>], n: usize) -> Option<Vec<Witness>> {
        if n == 0 {
            return if rows.is_empty() {
                Some(Vec::new())
            } else {
                None
            };
        }
        let heads = head_ctors(rows);
        if let Some(first) = heads.first() {
            let all = self.all_ctors(first);
            if all.iter().all(|c| heads.contains(c)) {
                for c in all {
                    let a = self.arity(c);
                    if let Some(mut w) = self.missing(&specialize(rows, c, a), a + n - 1) {
                        let rest = w.split_off(a);
                        let mut out = vec![Witness::Ctor(c.clone(), w)];
                        out.extend(rest);
                        return Some(out);
                    }
                }
                return None;
            }
            let mut w = self.missing(&default_matrix(rows), n - 1)?;
            let absent = all
                .iter()
                .find(|c| !heads.contains(c))
                .expect("incomplete signature");
            let head = Witness::Ctor(absent.clone(), vec![Witness::Any; self.arity(absent)]);
            w.insert(0, head);
            return Some(w);
        }
        let mut w = self.missing(&default_matrix(rows), n - 1)?;
        w.insert(0, Witness::Any);
        Some(w)
    }

    /// Whether some value matched by `q` is matched by no row of `rows`.
    fn useful(&self, rows: &[Vec<Pat>], q: &[Pat]) -> bool {
        let Some((head, tail)) = q.split_first() else {
            return rows.is_empty();
        };
        match head {
            Pat::Ctor(c, args) => {
                let mut q2 = args.clone();
                q2.extend_from_slice(tail);
                self.useful(&specialize(rows, c, args.len()), &q2)
            }
            Pat::Any => {
                let heads = head_ctors(rows);
                match heads.first() {
                    Some(first) if self.all_ctors(first).iter().all(|c| heads.contains(c)) => {
                        self.all_ctors(first).iter().any(|c| {
                            let a = self.arity(c);
                            let mut q2 = vec![Pat::Any; a];
                            q2.extend_from_slice(tail);
                            self.useful(&specialize(rows, c, a), &q2)
                        })
                    }
                    _ => self.useful(&default_matrix(rows), tail),
                }
            }
        }
    }
}

/// Missing value vector for a clause matrix of `n` columns, checked
/// top-down. Exposed for testing against brute-force enumeration.
pub fn missing_witness(
    sig: &Signature<'_>,
    rows: &[Vec<Pattern>],
    n: usize,
) -> Option<Vec<Witness>> {
    let rows: Vec<Vec<Pat>> = rows
        .iter()
        .map(|r| r.iter().map(simplify).collect())
        .collect();
    sig.missing(&rows, n)
}

struct Checker<'a> {
    sig: Signature<'a>,
    report: CoverageReport,
}

impl Checker<'_> {
    fn matrix(&mut self, subject: &str, span: &Span, rows: Vec<(Vec<Pat>, Span)>, n: usize) {
        let mut seen: Vec<Vec<Pat>> = Vec::new();
        for (row, row_span) in rows {
            if !self.sig.useful(&seen, &row) {
                self.report.warnings.push(RedundancyWarning {
                    span: row_span,
                    subject: subject.to_string(),
                });
            }
            seen.push(row);
        }
        if let Some(witness) = self.sig.missing(&seen, n) {
            self.report.errors.push(CoverageError {
                span: span.clone(),
                subject: subject.to_string(),
                witness,
            });
        }
    }

    fn fun(&mut self, f: &FunDef) {
        let rows = f
            .clauses
            .iter()
            .map(|c| (c.patterns.iter().map(simplify).collect(), c.span.clone()))
            .collect();
        self.matrix(&f.name, &f.span, rows, f.arity());
        for c in &f.clauses {
            self.term(&c.body);
        }
    }

    fn term(&mut self, t: &Term) {
        match &t.kind {
            TermKind::Var(_) | TermKind::Ctor(_) | TermKind::Prim(_) | TermKind::Lit(_) => {}
            TermKind::App(a, b) => {
                self.term(a);
                self.term(b);
            }
            TermKind::Lam(_, b) => self.term(b),
            TermKind::If(c, a, b) => {
                self.term(c);
                self.term(a);
                self.term(b);
            }
            TermKind::Case(s, branches) => {
                self.term(s);
                let rows = branches
                    .iter()
                    .map(|b| (vec![simplify(&b.pattern)], b.pattern.span().clone()))
                    .collect();
                self.matrix("case", &t.span, rows, 1);
                for b in branches {
                    self.term(&b.body);
                }
            }
            TermKind::Let(bindings, body) => {
                for f in group_let_bindings(bindings) {
                    self.fun(&f);
                }
                self.term(body);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::infer;
    use super::*;

    const LIST: &str = "data List a = Nil | Cons a (List a)\ndata Maybe a = Nothing | Just a\n";

    fn report(src: &str) -> CoverageReport {
        let p = infer(&load_source("Main.lm", &format!("{LIST}{src}"), &[]).unwrap()).unwrap();
        coverage_report(&p)
    }

    #[test]
    fn missing_nil_clause() {
        let r = report("head (Cons a rest) = Just a\nmain = head (Cons Z Nil)");
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].subject, "head");
        assert_eq!(
            r.errors[0].witness,
            vec![Witness::Ctor("Nil".into(), vec![])]
        );
        assert!(r.errors[0].to_string().contains("missing `Nil`"));
    }

    #[test]
    fn trailing_variable_clause_is_exhaustive() {
        let r = report("f (Cons a Nil) = a\nf xs = Z\nmain = f Nil");
        assert!(r.errors.is_empty());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn remove_is_exhaustive() {
        let r = report(
            "remove eqFunc ele (Cons hd tl) =\n  if eqFunc ele hd\n    then tl\n    else Cons hd (remove eqFunc ele tl)\nremove _ _ Nil = Nil\nmain = Z",
        );
        assert_eq!(r, CoverageReport::default());
    }

    #[test]
    fn nested_witness_and_case() {
        let r = report("f (Cons Z xs) = Z\nf Nil = Z\nmain = case f Nil of\n  S n => n\n");
        let shown: Vec<String> = r.errors.iter().map(|e| e.witness[0].to_string()).collect();
        assert_eq!(shown, vec!["Cons (S _) _", "Z"]);
    }

    #[test]
    fn redundant_clause_warns() {
        let r = report("f x = Z\nf Nil = Z\nmain = Z");
        assert!(r.errors.is_empty());
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].span.line, 4);
    }
}
