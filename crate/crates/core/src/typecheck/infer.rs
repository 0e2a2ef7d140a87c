//! Hindley-Milner inference over a loaded program.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::types::*;
use crate::deps::components;
use crate::prim::PrimOp;
use crate::syntax::*;

/// Types that exist without a declaration and have no constructors.
pub const BUILTIN_TYPES: [&str; 2] = ["Int", "World"];

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("{span}: type error: {detail}")]
    Type { span: Span, detail: String },
    #[error("{span}: annotation `{name} : {annotation}` is more general than the inferred type `{inferred}`")]
    AnnotationMismatch {
        span: Span,
        name: String,
        annotation: String,
        inferred: String,
    },
}

impl TypeError {
    pub fn span(&self) -> &Span {
        match self {
            TypeError::Type { span, .. } | TypeError::AnnotationMismatch { span, .. } => span,
        }
    }
}

fn err<T>(span: &Span, detail: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::Type {
        span: span.clone(),
        detail: detail.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorInfo {
    pub name: String,
    pub data: String,
    /// Position in the declaration; fixes the Scott selector order.
    pub index: usize,
    pub count: usize,
    pub params: Vec<TVar>,
    pub fields: Vec<Type>,
}

impl CtorInfo {
    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    pub fn result_type(&self) -> Type {
        Type::Con(
            self.data.clone(),
            self.params.iter().map(|v| Type::Var(*v)).collect(),
        )
    }

    pub fn scheme(&self) -> Scheme {
        Scheme {
            vars: self.params.clone(),
            ty: Type::arrows(self.fields.clone(), self.result_type()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataInfo {
    pub name: String,
    pub params: Vec<TVar>,
    /// Constructor names in declaration order; empty for built-in types.
    pub ctors: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LiteralType {
    Nat,
    Int,
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: SurfaceProgram,
    pub schemes: BTreeMap<String, Scheme>,
    pub ctors: HashMap<String, CtorInfo>,
    pub data: BTreeMap<String, DataInfo>,
    /// Resolved type of every integer literal, by source position.
    pub literals: HashMap<SpanKey, LiteralType>,
}

impl TypedProgram {
    pub fn scheme(&self, name: &str) -> Option<&Scheme> {
        self.schemes.get(name)
    }

    pub fn entry_scheme(&self) -> &Scheme {
        &self.schemes[&self.program.entry]
    }

    /// `(successor, zero)` constructor names if `Nat` has the numeral shape.
    pub fn nat_ctors(&self) -> Option<(String, String)> {
        nat_shape(&self.data, &self.ctors)
    }
}

pub(crate) fn nat_shape(
    data: &BTreeMap<String, DataInfo>,
    ctors: &HashMap<String, CtorInfo>,
) -> Option<(String, String)> {
    let nat = data.get("Nat")?;
    if !nat.params.is_empty() || nat.ctors.len() != 2 {
        return None;
    }
    let mut succ = None;
    let mut zero = None;
    for c in &nat.ctors {
        let info = &ctors[c];
        match info.fields.as_slice() {
            [] => zero = Some(c.clone()),
            [Type::Con(n, args)] if n == "Nat" && args.is_empty() => succ = Some(c.clone()),
            _ => return None,
        }
    }
    Some((succ?, zero?))
}

/// Infers the most general type of every top-level binding.
pub fn infer(program: &SurfaceProgram) -> Result<TypedProgram, TypeError> {
    let mut cx = Infer {
        subst: Subst::default(),
        next: 0,
        ctors: HashMap::new(),
        data: BTreeMap::new(),
        globals: HashMap::new(),
        locals: Vec::new(),
        literals: Vec::new(),
    };
    cx.declare_data(program)?;
    let defs = &program.bindings;
    let index: HashMap<&str, usize> = defs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.name.as_str(), i))
        .collect();
    let comps = components(defs.len(), |i| {
        defs[i]
            .free_vars()
            .iter()
            .filter_map(|v| index.get(v.as_str()).copied())
            .collect()
    });
    for comp in comps {
        let members: Vec<&FunDef> = comp.members.iter().map(|&i| &defs[i]).collect();
        for (name, scheme) in cx.infer_component(&members)? {
            cx.globals.insert(name, scheme);
        }
    }
    let literals = cx.default_literals()?;
    let schemes = cx
        .globals
        .iter()
        .map(|(n, s)| {
            (
                n.clone(),
                Scheme {
                    vars: s.vars.clone(),
                    ty: cx.subst.apply(&s.ty),
                },
            )
        })
        .collect();
    Ok(TypedProgram {
        program: program.clone(),
        schemes,
        ctors: cx.ctors,
        data: cx.data,
        literals,
    })
}

struct Infer {
    subst: Subst,
    next: TVar,
    ctors: HashMap<String, CtorInfo>,
    data: BTreeMap<String, DataInfo>,
    globals: HashMap<String, Scheme>,
    locals: Vec<(String, Scheme)>,
    literals: Vec<(Span, Type)>,
}

impl Infer {
    fn fresh(&mut self) -> Type {
        self.next += 1;
        Type::Var(self.next - 1)
    }

    fn declare_data(&mut self, program: &SurfaceProgram) -> Result<(), TypeError> {
        for b in BUILTIN_TYPES {
            self.data.insert(
                b.to_string(),
                DataInfo {
                    name: b.to_string(),
                    params: vec![],
                    ctors: vec![],
                },
            );
        }
        for d in &program.data {
            if self.data.contains_key(&d.name) {
                return err(
                    &d.span,
                    format!("type `{}` is declared more than once", d.name),
                );
            }
            let params: Vec<TVar> = d.params.iter().map(|_| self.next_var()).collect();
            self.data.insert(
                d.name.clone(),
                DataInfo {
                    name: d.name.clone(),
                    params,
                    ctors: d.ctors.iter().map(|c| c.name.clone()).collect(),
                },
            );
        }
        for d in &program.data {
            let params = self.data[&d.name].params.clone();
            let mut vars: HashMap<String, TVar> = HashMap::new();
            for (p, v) in d.params.iter().zip(&params) {
                if vars.insert(p.clone(), *v).is_some() {
                    return err(&d.span, format!("type variable `{p}` is repeated"));
                }
            }
            for (index, c) in d.ctors.iter().enumerate() {
                if self.ctors.contains_key(&c.name) {
                    return err(
                        &c.span,
                        format!("constructor `{}` is declared more than once", c.name),
                    );
                }
                let fields = c
                    .fields
                    .iter()
                    .map(|f| self.convert(f, &mut vars, false, &c.span))
                    .collect::<Result<Vec<_>, _>>()?;
                self.ctors.insert(
                    c.name.clone(),
                    CtorInfo {
                        name: c.name.clone(),
                        data: d.name.clone(),
                        index,
                        count: d.ctors.len(),
                        params: params.clone(),
                        fields,
                    },
                );
            }
        }
        Ok(())
    }

    fn next_var(&mut self) -> TVar {
        self.next += 1;
        self.next - 1
    }

    /// Converts written types. With `open`, unknown type variables are
    /// introduced fresh; otherwise they are an error.
    fn convert(
        &mut self,
        t: &TypeExpr,
        vars: &mut HashMap<String, TVar>,
        open: bool,
        span: &Span,
    ) -> Result<Type, TypeError> {
        Ok(match t {
            TypeExpr::Var(v) => match vars.get(v) {
                Some(id) => Type::Var(*id),
                None if open => {
                    let id = self.next_var();
                    vars.insert(v.clone(), id);
                    Type::Var(id)
                }
                None => {
                    return err(
                        span,
                        format!("type variable `{v}` is not a parameter of the declaration"),
                    )
                }
            },
            TypeExpr::Con(n, args) => {
                let Some(info) = self.data.get(n) else {
                    return err(span, format!("unknown type `{n}`"));
                };
                if info.params.len() != args.len() {
                    return err(
                        span,
                        format!(
                            "type `{n}` expects {} argument(s) but was given {}",
                            info.params.len(),
                            args.len()
                        ),
                    );
                }
                let args = args
                    .iter()
                    .map(|a| self.convert(a, vars, open, span))
                    .collect::<Result<_, _>>()?;
                Type::Con(n.clone(), args)
            }
            TypeExpr::Arrow(a, b) => Type::arrow(
                self.convert(a, vars, open, span)?,
                self.convert(b, vars, open, span)?,
            ),
        })
    }

    fn unify_at(&mut self, expected: &Type, actual: &Type, span: &Span) -> Result<(), TypeError> {
        self.subst.unify(expected, actual).map_err(|e| {
            let (e_ty, a_ty) = (self.subst.apply(expected), self.subst.apply(actual));
            let shown = display_types(&[&e_ty, &a_ty]);
            let detail = match e {
                UnifyError::OccursCheck(..) => {
                    format!(
                        "infinite type arising from matching `{}` with `{}`",
                        shown[0], shown[1]
                    )
                }
                UnifyError::Mismatch(..) => {
                    format!("expected `{}` but found `{}`", shown[0], shown[1])
                }
            };
            TypeError::Type {
                span: span.clone(),
                detail,
            }
        })
    }

    fn instantiate(&mut self, s: &Scheme) -> Type {
        if s.vars.is_empty() {
            return s.ty.clone();
        }
        let map: HashMap<TVar, Type> = s.vars.iter().map(|v| (*v, self.fresh())).collect();
        s.ty.rename(&map)
    }

    fn lookup(&self, name: &str) -> Option<&Scheme> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .or_else(|| self.globals.get(name))
    }

    /// Variables that must stay monomorphic: those free in the local
    /// environment and those of unresolved numeric literals.
    fn fixed_vars(&self) -> Vec<TVar> {
        let mut out = Vec::new();
        for (_, s) in &self.locals {
            let mut fv = Vec::new();
            self.subst.apply(&s.ty).free_vars(&mut fv);
            out.extend(fv.into_iter().filter(|v| !s.vars.contains(v)));
        }
        for (_, t) in &self.literals {
            self.subst.apply(t).free_vars(&mut out);
        }
        out
    }

    fn infer_component(&mut self, members: &[&FunDef]) -> Result<Vec<(String, Scheme)>, TypeError> {
        let tys: Vec<Type> = members.iter().map(|_| self.fresh()).collect();
        let mut annotations = Vec::new();
        for (m, ty) in members.iter().zip(&tys) {
            if let Some(a) = &m.annotation {
                let mut vars = HashMap::new();
                let at = self.convert(a, &mut vars, true, &m.span)?;
                self.unify_at(ty, &at, &m.span)?;
                annotations.push((*m, ty.clone(), vars));
            }
        }
        let depth = self.locals.len();
        for (m, ty) in members.iter().zip(&tys) {
            self.locals.push((m.name.clone(), Scheme::mono(ty.clone())));
        }
        for (m, ty) in members.iter().zip(&tys) {
            for c in &m.clauses {
                self.infer_clause(ty, c)?;
            }
        }
        self.locals.truncate(depth);

        let fixed = self.fixed_vars();
        for (m, ty, vars) in annotations {
            let mut seen = Vec::new();
            let general_enough = vars
                .values()
                .all(|v| match self.subst.apply(&Type::Var(*v)) {
                    Type::Var(w) if !seen.contains(&w) && !fixed.contains(&w) => {
                        seen.push(w);
                        true
                    }
                    _ => false,
                });
            if !general_enough {
                return Err(TypeError::AnnotationMismatch {
                    span: m.span.clone(),
                    name: m.name.clone(),
                    annotation: print_type_expr(m.annotation.as_ref().expect("annotated")),
                    inferred: self.subst.apply(&ty).to_string(),
                });
            }
        }
        Ok(members
            .iter()
            .zip(&tys)
            .map(|(m, ty)| {
                let ty = self.subst.apply(ty);
                let mut fv = Vec::new();
                ty.free_vars(&mut fv);
                fv.retain(|v| !fixed.contains(v));
                (m.name.clone(), Scheme { vars: fv, ty })
            })
            .collect())
    }

    fn infer_clause(&mut self, fun_ty: &Type, c: &Clause) -> Result<(), TypeError> {
        let args: Vec<Type> = c.patterns.iter().map(|_| self.fresh()).collect();
        let result = self.fresh();
        self.unify_at(fun_ty, &Type::arrows(args.clone(), result.clone()), &c.span)?;
        let depth = self.locals.len();
        for (p, t) in c.patterns.iter().zip(&args) {
            self.bind_pattern(p, t)?;
        }
        let body = self.infer_term(&c.body)?;
        self.unify_at(&result, &body, &c.body.span)?;
        self.locals.truncate(depth);
        Ok(())
    }

    fn bind_pattern(&mut self, p: &Pattern, expected: &Type) -> Result<(), TypeError> {
        match p {
            Pattern::Var(v, _) => self
                .locals
                .push((v.clone(), Scheme::mono(expected.clone()))),
            Pattern::Wildcard(_) => {}
            Pattern::Ctor(c, ps, span) => {
                let Some(info) = self.ctors.get(c).cloned() else {
                    return err(span, format!("unknown constructor `{c}`"));
                };
                if info.arity() != ps.len() {
                    return err(
                        span,
                        format!(
                            "constructor `{c}` expects {} argument(s) but the pattern has {}",
                            info.arity(),
                            ps.len()
                        ),
                    );
                }
                let map: HashMap<TVar, Type> =
                    info.params.iter().map(|v| (*v, self.fresh())).collect();
                self.unify_at(expected, &info.result_type().rename(&map), span)?;
                for (p, f) in ps.iter().zip(&info.fields) {
                    self.bind_pattern(p, &f.rename(&map))?;
                }
            }
        }
        Ok(())
    }

    fn infer_term(&mut self, t: &Term) -> Result<Type, TypeError> {
        match &t.kind {
            TermKind::Var(v) => match self.lookup(v).cloned() {
                Some(s) => Ok(self.instantiate(&s)),
                None => err(&t.span, format!("unbound variable `{v}`")),
            },
            TermKind::Ctor(c) => match self.ctors.get(c).map(CtorInfo::scheme) {
                Some(s) => Ok(self.instantiate(&s)),
                None => err(&t.span, format!("unknown constructor `{c}`")),
            },
            TermKind::Prim(p) => match PrimOp::from_name(p) {
                Some(op) => {
                    let result = if op.returns_bool() {
                        Type::con("Bool")
                    } else {
                        Type::con("Int")
                    };
                    Ok(Type::arrows([Type::con("Int"), Type::con("Int")], result))
                }
                None => err(&t.span, format!("unknown primitive `#{p}`")),
            },
            TermKind::Lit(_) => {
                let v = self.fresh();
                self.literals.push((t.span.clone(), v.clone()));
                Ok(v)
            }
            TermKind::App(f, a) => {
                let tf = self.infer_term(f)?;
                let ta = self.infer_term(a)?;
                let r = self.fresh();
                match self.subst.apply(&tf) {
                    Type::Arrow(dom, cod) => {
                        self.unify_at(&dom, &ta, &a.span)?;
                        Ok(*cod)
                    }
                    other => {
                        self.unify_at(&other, &Type::arrow(ta, r.clone()), &t.span)?;
                        Ok(r)
                    }
                }
            }
            TermKind::Lam(x, b) => {
                let tx = self.fresh();
                self.locals.push((x.clone(), Scheme::mono(tx.clone())));
                let tb = self.infer_term(b);
                self.locals.pop();
                Ok(Type::arrow(tx, tb?))
            }
            TermKind::If(c, a, b) => {
                let tc = self.infer_term(c)?;
                self.unify_at(&Type::con("Bool"), &tc, &c.span)?;
                let ta = self.infer_term(a)?;
                let tb = self.infer_term(b)?;
                self.unify_at(&ta, &tb, &b.span)?;
                Ok(ta)
            }
            TermKind::Case(s, branches) => {
                let ts = self.infer_term(s)?;
                let r = self.fresh();
                for br in branches {
                    let depth = self.locals.len();
                    self.bind_pattern(&br.pattern, &ts)?;
                    let tb = self.infer_term(&br.body)?;
                    self.unify_at(&r, &tb, &br.body.span)?;
                    self.locals.truncate(depth);
                }
                Ok(r)
            }
            TermKind::Let(bindings, body) => {
                let defs = group_let_bindings(bindings);
                let index: HashMap<&str, usize> = defs
                    .iter()
                    .enumerate()
                    .map(|(i, d)| (d.name.as_str(), i))
                    .collect();
                let comps = components(defs.len(), |i| {
                    defs[i]
                        .free_vars()
                        .iter()
                        .filter_map(|v| index.get(v.as_str()).copied())
                        .collect()
                });
                let depth = self.locals.len();
                for comp in comps {
                    let members: Vec<&FunDef> = comp.members.iter().map(|&i| &defs[i]).collect();
                    let schemes = self.infer_component(&members)?;
                    self.locals.extend(schemes);
                }
                let tb = self.infer_term(body);
                self.locals.truncate(depth);
                tb
            }
        }
    }

    /// Resolves literal types, defaulting unconstrained ones to `Nat`.
    fn default_literals(&mut self) -> Result<HashMap<SpanKey, LiteralType>, TypeError> {
        let nat = nat_shape(&self.data, &self.ctors);
        let mut out = HashMap::new();
        for (span, t) in std::mem::take(&mut self.literals) {
            if let Type::Var(v) = self.subst.apply(&t) {
                self.subst.bind(v, Type::con("Nat"));
            }
            let kind = match self.subst.apply(&t) {
                Type::Con(n, args) if n == "Nat" && args.is_empty() && nat.is_some() => {
                    LiteralType::Nat
                }
                Type::Con(n, args) if n == "Int" && args.is_empty() => LiteralType::Int,
                other => {
                    return err(
                        &span,
                        format!("an integer literal cannot have type `{other}`"),
                    )
                }
            };
            out.insert(span.key(), kind);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn typed(src: &str) -> Result<TypedProgram, TypeError> {
        infer(&load_source("Main.lm", src, &[]).unwrap())
    }

    fn ty(src: &str, name: &str) -> String {
        typed(src).unwrap().scheme(name).unwrap().to_string()
    }

    const PLUS: &str = "plus Z n = n\nplus (S m) n = S (plus m n)\nmain = plus 1 1\n";

    #[test]
    fn plus_is_nat_to_nat_to_nat() {
        assert_eq!(ty(PLUS, "plus"), "Nat -> Nat -> Nat");
        assert_eq!(ty(PLUS, "main"), "Nat");
    }

    #[test]
    fn identity_is_polymorphic() {
        let p = typed("id x = x\nmain = id Z").unwrap();
        let s = p.scheme("id").unwrap();
        assert_eq!(s.to_string(), "a -> a");
        assert_eq!(s.vars.len(), 1);
    }

    #[test]
    fn if_condition_must_be_bool() {
        let e = typed("f = if Z then Z else Z\nmain = f").unwrap_err();
        match e {
            TypeError::Type { span, detail } => {
                assert_eq!((span.line, span.col), (1, 8));
                assert!(
                    detail.contains("Bool") && detail.contains("Nat"),
                    "{detail}"
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn let_polymorphism() {
        assert_eq!(ty("main = let id x = x in id id True", "main"), "Bool");
        assert!(typed("main = (\\id . id id True) (\\x . x)").is_err());
    }

    #[test]
    fn literal_defaulting_and_int() {
        let p = typed("size = 3\nk : Int\nk = #add 1 2\nmain = size").unwrap();
        assert_eq!(p.scheme("size").unwrap().to_string(), "Nat");
        assert_eq!(p.scheme("k").unwrap().to_string(), "Int");
        let mut kinds: Vec<_> = p.literals.values().copied().collect();
        kinds.sort_by_key(|k| *k == LiteralType::Int);
        assert_eq!(
            kinds,
            vec![LiteralType::Nat, LiteralType::Int, LiteralType::Int]
        );
    }

    #[test]
    fn literal_of_other_type_rejected() {
        assert!(typed("b : Bool\nb = 3\nmain = b").is_err());
    }

    #[test]
    fn annotations_may_specialise_but_not_generalise() {
        assert_eq!(ty("f : Nat -> Nat\nf x = x\nmain = f Z", "f"), "Nat -> Nat");
        assert!(matches!(
            typed("f : a -> b\nf x = x\nmain = Z"),
            Err(TypeError::AnnotationMismatch { .. })
        ));
        assert!(matches!(
            typed("f : a -> a\nf x = Z\nmain = Z"),
            Err(TypeError::AnnotationMismatch { .. })
        ));
    }

    #[test]
    fn mutual_recursion() {
        let src =
            "even Z = True\neven (S n) = odd n\nodd Z = False\nodd (S n) = even n\nmain = even 4";
        assert_eq!(ty(src, "even"), "Nat -> Bool");
        assert_eq!(ty(src, "odd"), "Nat -> Bool");
    }

    #[test]
    fn polymorphic_data() {
        let src = "data List a = Nil | Cons a (List a)\ndata Maybe a = Nothing | Just a\n\
                   map f Nil = Nil\nmap f (Cons x xs) = Cons (f x) (map f xs)\n\
                   head (Cons a rest) = Just a\nhead Nil = Nothing\nmain = head (map S (Cons 1 Nil))";
        assert_eq!(ty(src, "map"), "(a -> b) -> List a -> List b");
        assert_eq!(ty(src, "head"), "List a -> Maybe a");
        assert_eq!(ty(src, "main"), "Maybe Nat");
    }

    #[test]
    fn occurs_check_reported() {
        assert!(typed("f x = x x\nmain = Z").is_err());
    }

    #[test]
    fn unknown_names() {
        assert!(typed("main = foo").is_err());
        assert!(typed("main = Foo").is_err());
        assert!(typed("main = #nope 1 2").is_err());
        assert!(typed("data T = A Bogus\nmain = Z").is_err());
    }
}
