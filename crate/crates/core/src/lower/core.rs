use std::fmt;

use crate::prim::op_name;

/// Untyped lambda calculus with a fixpoint combinator and integer
/// primitives: the target of lowering.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CoreTerm {
    Var(String),
    App(Box<CoreTerm>, Box<CoreTerm>),
    Lam(String, Box<CoreTerm>),
    Y,
    /// Primitive operation by identifier (see [`crate::prim`]).
    Prim(u32),
    Int(i64),
}

impl CoreTerm {
    pub fn var(v: &str) -> CoreTerm {
        CoreTerm::Var(v.to_string())
    }

    pub fn app(f: CoreTerm, a: CoreTerm) -> CoreTerm {
        CoreTerm::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: CoreTerm, args: impl IntoIterator<Item = CoreTerm>) -> CoreTerm {
        args.into_iter().fold(f, CoreTerm::app)
    }

    pub fn lam(v: &str, b: CoreTerm) -> CoreTerm {
        CoreTerm::Lam(v.to_string(), Box::new(b))
    }

    /// `\v1 v2 ... . b`
    pub fn lams<S: AsRef<str>>(vs: &[S], b: CoreTerm) -> CoreTerm {
        vs.iter()
            .rev()
            .fold(b, |acc, v| CoreTerm::lam(v.as_ref(), acc))
    }

    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            CoreTerm::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone())
                }
            }
            CoreTerm::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            CoreTerm::Lam(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            CoreTerm::Y | CoreTerm::Prim(_) | CoreTerm::Int(_) => {}
        }
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        match self {
            CoreTerm::Var(v) => v == x,
            CoreTerm::App(f, a) => f.occurs_free(x) || a.occurs_free(x),
            CoreTerm::Lam(v, b) => v != x && b.occurs_free(x),
            _ => false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn size(&self) -> usize {
        match self {
            CoreTerm::App(f, a) => 1 + f.size() + a.size(),
            CoreTerm::Lam(_, b) => 1 + b.size(),
            _ => 1,
        }
    }

    /// Capture-avoiding substitution of `u` for free occurrences of `x`.
    pub fn subst(&self, x: &str, u: &CoreTerm) -> CoreTerm {
        let fv = u.free_vars();
        self.subst_with(x, u, &fv)
    }

    fn subst_with(&self, x: &str, u: &CoreTerm, fv: &[String]) -> CoreTerm {
        match self {
            CoreTerm::Var(v) if v == x => u.clone(),
            CoreTerm::App(f, a) => CoreTerm::app(f.subst_with(x, u, fv), a.subst_with(x, u, fv)),
            CoreTerm::Lam(v, b) if v != x && b.occurs_free(x) => {
                if fv.contains(v) {
                    let fresh = fresh_name(v, |n| fv.iter().any(|f| f == n) || b.occurs_free(n));
                    let renamed = b.subst_with(v, &CoreTerm::Var(fresh.clone()), &[fresh.clone()]);
                    CoreTerm::lam(&fresh, renamed.subst_with(x, u, fv))
                } else {
                    CoreTerm::lam(v, b.subst_with(x, u, fv))
                }
            }
            _ => self.clone(),
        }
    }
}

/// `base'1`, `base'2`, ... — the first one `taken` rejects.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let stem = base.split('\'').next().unwrap_or(base);
    (1..)
        .map(|i| format!("{stem}'{i}"))
        .find(|n| !taken(n))
        .expect("unbounded supply")
}

/// Lambda-calculus syntax: `\x . body`, juxtaposition, `Y`, `#add`, integers.
impl fmt::Display for CoreTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_core(f, self, 0)
    }
}

fn write_core(f: &mut fmt::Formatter<'_>, t: &CoreTerm, prec: u8) -> fmt::Result {
    match t {
        CoreTerm::Var(v) => f.write_str(v),
        CoreTerm::Y => f.write_str("Y"),
        CoreTerm::Prim(id) => write!(f, "#{}", op_name(*id)),
        CoreTerm::Int(n) if *n < 0 => write!(f, "({n})"),
        CoreTerm::Int(n) => write!(f, "{n}"),
        CoreTerm::Lam(..) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            f.write_str("\\")?;
            let mut t = t;
            let mut first = true;
            while let CoreTerm::Lam(v, b) = t {
                if !first {
                    f.write_str(" ")?;
                }
                f.write_str(v)?;
                first = false;
                t = b;
            }
            f.write_str(" . ")?;
            write_core(f, t, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        CoreTerm::App(a, b) => {
            if prec > 1 {
                f.write_str("(")?;
            }
            write_core(f, a, 1)?;
            f.write_str(" ")?;
            write_core(f, b, 2)?;
            if prec > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printing() {
        let t = CoreTerm::lams(&["f1", "f2"], CoreTerm::var("f1"));
        assert_eq!(t.to_string(), "\\f1 f2 . f1");
        let fac = CoreTerm::app(
            CoreTerm::Y,
            CoreTerm::lam("f", CoreTerm::app(CoreTerm::var("f"), CoreTerm::Int(3))),
        );
        assert_eq!(fac.to_string(), "Y (\\f . f 3)");
        let nested = CoreTerm::app(
            CoreTerm::var("a"),
            CoreTerm::app(CoreTerm::var("b"), CoreTerm::Prim(0)),
        );
        assert_eq!(nested.to_string(), "a (b #add)");
    }

    #[test]
    fn substitution_avoids_capture() {
        // (\y . x y)[x := y]  ==>  \y'1 . y y'1
        let t = CoreTerm::lam("y", CoreTerm::app(CoreTerm::var("x"), CoreTerm::var("y")));
        let r = t.subst("x", &CoreTerm::var("y"));
        assert_eq!(
            r,
            CoreTerm::lam(
                "y'1",
                CoreTerm::app(CoreTerm::var("y"), CoreTerm::var("y'1"))
            )
        );
    }
}
