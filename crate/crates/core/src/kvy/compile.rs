//! Abstraction elimination from lambda terms to K, V and Y.
//!
//! Lambdas are removed innermost first. A binder that does not occur in
//! its (already compiled) body becomes `K body`. Otherwise the body tree is
//! rebuilt by a V combinator: the multipath marks every occurrence of the
//! variable and the residual lists the subtrees hanging off that path, in
//! the order the V rules consume them.
//!
//! Paths are limited to 32 tokens. When a body needs a longer path, the
//! abstraction is split at the body's root application with one of three
//! small closed helpers, each of them compiled by the same rules:
//! `\f g x . f x (g x)`, `\f g x . f x g` and `\f g x . f (g x)`.

use std::collections::HashMap;
use std::rc::Rc;

use super::path::{Multipath, MAX_PATH_TOKENS};
use super::{KvyError, KvyTerm};
use crate::lower::CoreTerm;

/// Partly compiled term: combinator leaves, variables still to be
/// abstracted, and applications caching their sorted free variables.
#[derive(Clone, Debug)]
enum Mx {
    Var(u32),
    Atom(KvyTerm),
    App(Box<Mx>, Box<Mx>, Rc<[u32]>),
}

impl Mx {
    fn app(l: Mx, r: Mx) -> Mx {
        let fv = merge(l.fv(), r.fv());
        Mx::App(Box::new(l), Box::new(r), fv)
    }

    fn fv(&self) -> &[u32] {
        match self {
            Mx::Var(v) => std::slice::from_ref(v),
            Mx::Atom(_) => &[],
            Mx::App(_, _, fv) => fv,
        }
    }

    fn has(&self, x: u32) -> bool {
        self.fv().binary_search(&x).is_ok()
    }

    fn into_kvy(self) -> KvyTerm {
        match self {
            Mx::Atom(a) => a,
            Mx::App(l, r, _) => KvyTerm::app(l.into_kvy(), r.into_kvy()),
            Mx::Var(_) => unreachable!("variables are removed before conversion"),
        }
    }
}

fn merge(a: &[u32], b: &[u32]) -> Rc<[u32]> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out.into()
}

fn bracket_mx(x: u32, t: &Mx) -> Multipath {
    match t {
        Mx::App(l, r, _) => match (l.has(x), r.has(x)) {
            (true, true) => Multipath::fork(bracket_mx(x, l), bracket_mx(x, r)),
            (true, false) => Multipath::left(bracket_mx(x, l)),
            _ => Multipath::right(bracket_mx(x, r)),
        },
        _ => Multipath::End,
    }
}

/// Token count of the path `bracket_mx` would build, without building it.
fn path_tokens(x: u32, t: &Mx, limit: usize) -> usize {
    match t {
        Mx::App(l, r, _) => {
            let (in_l, in_r) = (l.has(x), r.has(x));
            let mut n = 1;
            if in_l {
                n += path_tokens(x, l, limit);
            }
            if n <= limit && in_r {
                n += path_tokens(x, r, limit);
            }
            n
        }
        _ => 1,
    }
}

fn take_residual(x: u32, t: Mx, out: &mut Vec<Mx>) {
    if let Mx::App(l, r, _) = t {
        match (l.has(x), r.has(x)) {
            (true, true) => {
                take_residual(x, *l, out);
                take_residual(x, *r, out);
            }
            (true, false) => {
                out.push(*r);
                take_residual(x, *l, out);
            }
            _ => {
                out.push(*l);
                take_residual(x, *r, out);
            }
        }
    }
}

#[derive(Default)]
struct Compiler {
    names: HashMap<String, u32>,
    helpers: HashMap<&'static str, Mx>,
}

impl Compiler {
    fn intern(&mut self, name: &str) -> u32 {
        let next = self.names.len() as u32;
        *self.names.entry(name.to_string()).or_insert(next)
    }

    fn compile(&mut self, t: &CoreTerm) -> Mx {
        match t {
            CoreTerm::Var(v) => Mx::Var(self.intern(v)),
            CoreTerm::App(f, a) => {
                let f = self.compile(f);
                let a = self.compile(a);
                Mx::app(f, a)
            }
            CoreTerm::Lam(v, b) => {
                let body = self.compile(b);
                let x = self.intern(v);
                self.abstract_var(x, body)
            }
            CoreTerm::Y => Mx::Atom(KvyTerm::Y),
            CoreTerm::Prim(id) => Mx::Atom(KvyTerm::Prim(*id)),
            CoreTerm::Int(n) => Mx::Atom(KvyTerm::Int(*n)),
        }
    }

    fn abstract_var(&mut self, x: u32, body: Mx) -> Mx {
        if !body.has(x) {
            return Mx::app(Mx::Atom(KvyTerm::K), body);
        }
        if path_tokens(x, &body, MAX_PATH_TOKENS) <= MAX_PATH_TOKENS {
            let path = bracket_mx(x, &body);
            let mut args = Vec::with_capacity(path.degree());
            take_residual(x, body, &mut args);
            return args.into_iter().fold(Mx::Atom(KvyTerm::V(path)), Mx::app);
        }
        let Mx::App(l, r, _) = body else {
            unreachable!("a long path passes through an application")
        };
        match (l.has(x), r.has(x)) {
            (true, true) => {
                let s = self.helper("s");
                let l = self.abstract_var(x, *l);
                let r = self.abstract_var(x, *r);
                Mx::app(Mx::app(s, l), r)
            }
            (true, false) => {
                let c = self.helper("c");
                let l = self.abstract_var(x, *l);
                Mx::app(Mx::app(c, l), *r)
            }
            _ => {
                let b = self.helper("b");
                let r = self.abstract_var(x, *r);
                Mx::app(Mx::app(b, *l), r)
            }
        }
    }

    fn helper(&mut self, which: &'static str) -> Mx {
        if let Some(h) = self.helpers.get(which) {
            return h.clone();
        }
        let (f, g, x) = (CoreTerm::var("f"), CoreTerm::var("g"), CoreTerm::var("x"));
        let body = match which {
            "s" => CoreTerm::apps(f, [x.clone(), CoreTerm::app(g, x)]),
            "c" => CoreTerm::apps(f, [x, g]),
            _ => CoreTerm::app(f, CoreTerm::app(g, x)),
        };
        let h = self.compile(&CoreTerm::lams(&["f", "g", "x"], body));
        self.helpers.insert(which, h.clone());
        h
    }
}

/// Compiles a closed lambda term to combinator code.
pub fn compile_core(t: &CoreTerm) -> Result<KvyTerm, KvyError> {
    if let Some(name) = t.free_vars().into_iter().next() {
        return Err(KvyError::FreeVariable { name });
    }
    Ok(Compiler::default().compile(t).into_kvy())
}

fn lambda_free(cx: &mut Compiler, t: &CoreTerm) -> Result<Mx, KvyError> {
    if contains_lambda(t) {
        return Err(KvyError::UnexpectedLambda);
    }
    Ok(cx.compile(t))
}

fn contains_lambda(t: &CoreTerm) -> bool {
    match t {
        CoreTerm::Lam(..) => true,
        CoreTerm::App(f, a) => contains_lambda(f) || contains_lambda(a),
        _ => false,
    }
}

/// The multipath of every occurrence of `x` in the lambda-free term `t`.
pub fn bracket(x: &str, t: &CoreTerm) -> Result<Multipath, KvyError> {
    let mut cx = Compiler::default();
    let m = lambda_free(&mut cx, t)?;
    let id = cx.intern(x);
    if !m.has(id) {
        return Err(KvyError::VarAbsent { var: x.to_string() });
    }
    Ok(bracket_mx(id, &m))
}

/// The subterms hanging off the path of `x` in `t`, in argument order.
pub fn residual(x: &str, t: &CoreTerm) -> Result<Vec<CoreTerm>, KvyError> {
    let mut cx = Compiler::default();
    let m = lambda_free(&mut cx, t)?;
    let id = cx.intern(x);
    if !m.has(id) {
        return Err(KvyError::VarAbsent { var: x.to_string() });
    }
    let names: HashMap<u32, String> = cx.names.iter().map(|(n, i)| (*i, n.clone())).collect();
    let mut out = Vec::new();
    take_residual(id, m, &mut out);
    Ok(out.into_iter().map(|m| to_core(&names, m)).collect())
}

fn to_core(names: &HashMap<u32, String>, m: Mx) -> CoreTerm {
    match m {
        Mx::Var(v) => CoreTerm::Var(names[&v].clone()),
        Mx::App(l, r, _) => CoreTerm::app(to_core(names, *l), to_core(names, *r)),
        Mx::Atom(KvyTerm::Y) => CoreTerm::Y,
        Mx::Atom(KvyTerm::Prim(id)) => CoreTerm::Prim(id),
        Mx::Atom(KvyTerm::Int(n)) => CoreTerm::Int(n),
        Mx::Atom(other) => unreachable!("lambda-free core terms contain no {other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> CoreTerm {
        CoreTerm::var(s)
    }

    fn ap(f: CoreTerm, args: &[CoreTerm]) -> CoreTerm {
        CoreTerm::apps(f, args.iter().cloned())
    }

    fn first_example() -> CoreTerm {
        // a (b (c x)) (x d)
        ap(
            v("a"),
            &[ap(v("b"), &[ap(v("c"), &[v("x")])]), ap(v("x"), &[v("d")])],
        )
    }

    fn second_example() -> CoreTerm {
        // (a b (x (c d))) (x (g h) (e f))
        let left = ap(v("a"), &[v("b"), ap(v("x"), &[ap(v("c"), &[v("d")])])]);
        let right = ap(v("x"), &[ap(v("g"), &[v("h")]), ap(v("e"), &[v("f")])]);
        ap(left, &[right])
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(bracket("x", &v("x")).unwrap(), Multipath::End);
        assert_eq!(
            bracket("x", &first_example()).unwrap().to_string(),
            "{>>>,<}"
        );
        assert_eq!(
            bracket("x", &second_example()).unwrap().to_string(),
            "{><,<<}"
        );
        assert_eq!(
            bracket("y", &first_example()),
            Err(KvyError::VarAbsent { var: "y".into() })
        );
    }

    #[test]
    fn residual_examples() {
        let shown = |t: &CoreTerm| {
            residual("x", t)
                .unwrap()
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(shown(&first_example()), vec!["a", "b", "c", "d"]);
        assert_eq!(shown(&second_example()), vec!["a b", "c d", "e f", "g h"]);
        assert!(shown(&v("x")).is_empty());
    }

    #[test]
    fn booleans() {
        let f = CoreTerm::lams(&["f1", "f2"], v("f1"));
        assert_eq!(compile_core(&f).unwrap().to_string(), "V> K");
        let t = CoreTerm::lams(&["f1", "f2"], v("f2"));
        assert_eq!(compile_core(&t).unwrap().to_string(), "K V");
        assert_eq!(
            compile_core(&CoreTerm::lam("x", v("x")))
                .unwrap()
                .to_string(),
            "V"
        );
    }

    #[test]
    fn free_variables_rejected() {
        assert_eq!(
            compile_core(&v("y")),
            Err(KvyError::FreeVariable { name: "y".into() })
        );
    }

    #[test]
    fn long_paths_are_split() {
        // \x . x x ... x  with 40 occurrences needs far more than 32 tokens.
        let body = ap(v("x"), &vec![v("x"); 39]);
        let t = compile_core(&CoreTerm::lam("x", body)).unwrap();
        fn paths_fit(t: &KvyTerm) -> bool {
            match t {
                KvyTerm::V(p) => p.token_count() <= MAX_PATH_TOKENS,
                KvyTerm::App(f, a) => paths_fit(f) && paths_fit(a),
                _ => true,
            }
        }
        assert!(paths_fit(&t));
    }
}
