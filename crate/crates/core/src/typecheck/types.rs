use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub type TVar = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Var(TVar),
    Con(String, Vec<Type>),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn con(name: &str) -> Type {
        Type::Con(name.to_string(), Vec::new())
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    /// `a1 -> a2 -> ... -> r`
    pub fn arrows(
        args: impl IntoIterator<Item = Type, IntoIter: DoubleEndedIterator>,
        result: Type,
    ) -> Type {
        args.into_iter()
            .rev()
            .fold(result, |acc, a| Type::arrow(a, acc))
    }

    pub fn free_vars(&self, out: &mut Vec<TVar>) {
        match self {
            Type::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Type::Con(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Type::Arrow(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn occurs(&self, v: TVar) -> bool {
        match self {
            Type::Var(w) => *w == v,
            Type::Con(_, args) => args.iter().any(|a| a.occurs(v)),
            Type::Arrow(a, b) => a.occurs(v) || b.occurs(v),
        }
    }

    /// Replaces variables according to `map`, leaving others untouched.
    pub fn rename(&self, map: &HashMap<TVar, Type>) -> Type {
        match self {
            Type::Var(v) => map.get(v).cloned().unwrap_or(Type::Var(*v)),
            Type::Con(n, args) => {
                Type::Con(n.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
            Type::Arrow(a, b) => Type::arrow(a.rename(map), b.rename(map)),
        }
    }

    /// Splits `a1 -> ... -> an -> r` into `([a1..an], r)`.
    pub fn uncurry(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut t = self;
        while let Type::Arrow(a, b) = t {
            args.push(&**a);
            t = b;
        }
        (args, t)
    }
}

/// Prints with variables renamed `a`, `b`, `c`, ... in order of first
/// appearance.
impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut order = Vec::new();
        self.free_vars(&mut order);
        let names: HashMap<TVar, String> = order
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, var_name(i)))
            .collect();
        write_type(f, self, &names, 0)
    }
}

/// Prints several types with one shared variable naming, so that a variable
/// occurring in two of them gets the same letter in both.
pub fn display_types(ts: &[&Type]) -> Vec<String> {
    let mut order = Vec::new();
    for t in ts {
        t.free_vars(&mut order);
    }
    let names: HashMap<TVar, String> = order
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, var_name(i)))
        .collect();
    ts.iter().map(|t| Named(t, &names).to_string()).collect()
}

struct Named<'a>(&'a Type, &'a HashMap<TVar, String>);

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self.0, self.1, 0)
    }
}

fn var_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

fn write_type(
    f: &mut fmt::Formatter<'_>,
    t: &Type,
    names: &HashMap<TVar, String>,
    prec: u8,
) -> fmt::Result {
    match t {
        Type::Var(v) => f.write_str(&names[v]),
        Type::Con(n, args) if args.is_empty() => f.write_str(n),
        Type::Con(n, args) => {
            if prec >= 2 {
                f.write_str("(")?;
            }
            f.write_str(n)?;
            for a in args {
                f.write_str(" ")?;
                write_type(f, a, names, 2)?;
            }
            if prec >= 2 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Type::Arrow(a, b) => {
            if prec >= 1 {
                f.write_str("(")?;
            }
            write_type(f, a, names, 1)?;
            f.write_str(" -> ")?;
            write_type(f, b, names, 0)?;
            if prec >= 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub vars: Vec<TVar>,
    pub ty: Type,
}

impl Scheme {
    pub fn mono(ty: Type) -> Self {
        Scheme {
            vars: Vec::new(),
            ty,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ty.fmt(f)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum UnifyError {
    #[error("infinite type: {0:?} occurs in {1}")]
    OccursCheck(TVar, Type),
    #[error("cannot match {0} with {1}")]
    Mismatch(Type, Type),
}

/// Triangular substitution: bindings may mention other bound variables;
/// [`Subst::apply`] resolves them fully.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    map: HashMap<TVar, Type>,
}

impl Subst {
    pub fn get(&self, v: TVar) -> Option<&Type> {
        self.map.get(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn bind(&mut self, v: TVar, t: Type) {
        self.map.insert(v, t);
    }

    pub fn apply(&self, t: &Type) -> Type {
        match t {
            Type::Var(v) => match self.map.get(v) {
                Some(u) => self.apply(u),
                None => t.clone(),
            },
            Type::Con(n, args) => {
                Type::Con(n.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            Type::Arrow(a, b) => Type::arrow(self.apply(a), self.apply(b)),
        }
    }

    /// Follows variable bindings at the root only.
    fn shallow<'a>(&'a self, mut t: &'a Type) -> &'a Type {
        while let Type::Var(v) = t {
            match self.map.get(v) {
                Some(u) => t = u,
                None => break,
            }
        }
        t
    }

    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), UnifyError> {
        let a = self.shallow(a).clone();
        let b = self.shallow(b).clone();
        match (&a, &b) {
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::Var(x), t) | (t, Type::Var(x)) => {
                let resolved = self.apply(t);
                if resolved.occurs(*x) {
                    return Err(UnifyError::OccursCheck(*x, resolved));
                }
                self.map.insert(*x, resolved);
                Ok(())
            }
            (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            (Type::Con(n1, args1), Type::Con(n2, args2))
                if n1 == n2 && args1.len() == args2.len() =>
            {
                for (x, y) in args1.iter().zip(args2) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            _ => Err(UnifyError::Mismatch(self.apply(&a), self.apply(&b))),
        }
    }
}

/// Most general unifier of `a` and `b`.
pub fn unify(a: &Type, b: &Type) -> Result<Subst, UnifyError> {
    let mut s = Subst::default();
    s.unify(a, b)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> Type {
        Type::con("Nat")
    }

    #[test]
    fn binds_variable() {
        let s = unify(&Type::Var(0), &nat()).unwrap();
        assert_eq!(s.apply(&Type::Var(0)), nat());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn clash_after_binding() {
        let a = Type::arrow(Type::Var(0), Type::Var(0));
        let b = Type::arrow(nat(), Type::con("Bool"));
        assert!(matches!(unify(&a, &b), Err(UnifyError::Mismatch(..))));
    }

    #[test]
    fn occurs_check() {
        let list = Type::Con("List".into(), vec![Type::Var(0)]);
        assert!(matches!(
            unify(&Type::Var(0), &list),
            Err(UnifyError::OccursCheck(0, _))
        ));
    }

    #[test]
    fn display_renames_in_order() {
        let t = Type::arrows(
            [
                Type::arrow(Type::Var(7), Type::Var(3)),
                Type::Con("List".into(), vec![Type::Var(7)]),
            ],
            Type::Con("List".into(), vec![Type::Var(3)]),
        );
        assert_eq!(t.to_string(), "(a -> b) -> List a -> List b");
    }
}
