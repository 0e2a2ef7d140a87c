//! Source printer. Output uses explicit braces and semicolons, so it parses
//! back to the same tree regardless of indentation.

use std::fmt::Write;

use super::ast::*;

pub fn print_module(m: &SurfaceModule) -> String {
    let mut out = String::new();
    for i in &m.imports {
        let _ = writeln!(out, "import {}", i.module);
    }
    for d in &m.decls {
        match d {
            Decl::Data(d) => out.push_str(&print_data(d)),
            Decl::Annotation(a) => {
                let _ = write!(out, "{} : {}", a.name, print_type_expr(&a.ty));
            }
            Decl::Clause(c) => out.push_str(&equation(&c.name, &c.patterns, &c.body)),
        }
        out.push('\n');
    }
    out
}

pub fn print_data(d: &DataDecl) -> String {
    let mut s = format!("data {}", d.name);
    for p in &d.params {
        let _ = write!(s, " {p}");
    }
    s.push_str(" =");
    for (i, c) in d.ctors.iter().enumerate() {
        if i > 0 {
            s.push_str(" |");
        }
        let _ = write!(s, " {}", c.name);
        for f in &c.fields {
            let _ = write!(s, " {}", atype(f));
        }
    }
    s
}

fn equation(name: &str, patterns: &[Pattern], body: &Term) -> String {
    let mut s = name.to_string();
    for p in patterns {
        let _ = write!(s, " {}", apat(p));
    }
    let _ = write!(s, " = {}", print_term(body));
    s
}

pub fn print_type_expr(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Arrow(a, b) => {
            let dom = match **a {
                TypeExpr::Arrow(..) => format!("({})", print_type_expr(a)),
                _ => print_type_expr(a),
            };
            format!("{dom} -> {}", print_type_expr(b))
        }
        TypeExpr::Con(n, args) if !args.is_empty() => {
            let mut s = n.clone();
            for a in args {
                let _ = write!(s, " {}", atype(a));
            }
            s
        }
        _ => atype(t),
    }
}

fn atype(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Var(v) => v.clone(),
        TypeExpr::Con(n, args) if args.is_empty() => n.clone(),
        _ => format!("({})", print_type_expr(t)),
    }
}

pub fn print_pattern(p: &Pattern) -> String {
    match p {
        Pattern::Ctor(c, args, _) if !args.is_empty() => {
            let mut s = c.clone();
            for a in args {
                let _ = write!(s, " {}", apat(a));
            }
            s
        }
        _ => apat(p),
    }
}

fn apat(p: &Pattern) -> String {
    match p {
        Pattern::Var(v, _) => v.clone(),
        Pattern::Wildcard(_) => "_".into(),
        Pattern::Ctor(c, args, _) if args.is_empty() => c.clone(),
        Pattern::Ctor(..) => format!("({})", print_pattern(p)),
    }
}

pub fn print_term(t: &Term) -> String {
    match &t.kind {
        TermKind::Lam(v, b) => format!("\\{v} . {}", print_term(b)),
        TermKind::Let(bs, body) => {
            let mut s = "let {".to_string();
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    s.push_str(" ;");
                }
                if let Some(a) = &b.annotation {
                    let _ = write!(s, " {} : {} ;", b.name, print_type_expr(a));
                }
                let _ = write!(s, " {}", equation(&b.name, &b.patterns, &b.body));
            }
            let _ = write!(s, " }} in {}", print_term(body));
            s
        }
        TermKind::If(c, a, b) => format!(
            "if {} then {} else {}",
            print_term(c),
            print_term(a),
            print_term(b)
        ),
        TermKind::Case(s, bs) => {
            let mut out = format!("case {} of {{", print_term(s));
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ;");
                }
                let _ = write!(
                    out,
                    " {} => {}",
                    print_pattern(&b.pattern),
                    print_term(&b.body)
                );
            }
            out.push_str(" }");
            out
        }
        TermKind::App(f, a) => {
            let head = match f.kind {
                TermKind::App(..) => print_term(f),
                _ => aterm(f),
            };
            format!("{head} {}", aterm(a))
        }
        _ => aterm(t),
    }
}

fn aterm(t: &Term) -> String {
    match &t.kind {
        TermKind::Var(v) => v.clone(),
        TermKind::Ctor(c) => c.clone(),
        TermKind::Prim(p) => format!("#{p}"),
        TermKind::Lit(n) => n.to_string(),
        _ => format!("({})", print_term(t)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_source;
    use super::*;

    fn roundtrip(src: &str) {
        let m = parse_source("T", "t.lm", src).unwrap();
        let printed = print_module(&m);
        let again =
            parse_source("T", "printed.lm", &printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(m, again, "{printed}");
    }

    #[test]
    fn nat_program_roundtrips() {
        roundtrip(
            "data Nat = S Nat | Z\nplus : Nat -> Nat -> Nat\nplus Z b = b\nplus (S a) b = S (plus a b)\nmain = plus 1 1\n",
        );
    }

    #[test]
    fn nested_terms_roundtrip() {
        roundtrip(
            "f g xs = let\n  h y = case y of\n    Cons a (Cons b _) => \\z . g a (b z)\n    _ => if #eq 1 2 then (\\q . q) else g\n  k : (a -> b) -> List a\n  k = h\n in k (f g) xs\n",
        );
    }

    #[test]
    fn arrow_types_parenthesise_domain() {
        let m = parse_source("T", "t.lm", "m : (a -> b) -> List (Maybe a) -> b").unwrap();
        assert_eq!(print_module(&m), "m : (a -> b) -> List (Maybe a) -> b\n");
    }
}
