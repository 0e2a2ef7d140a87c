use super::ast::*;
use super::layout::layout;
use super::lexer::{Tok, Token};
use super::SyntaxError;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: Span,
}

type PResult<T> = Result<T, SyntaxError>;

/// Parses one module from raw (pre-layout) tokens.
pub fn parse_module(name: &str, tokens: Vec<Token>) -> PResult<SurfaceModule> {
    let end = tokens.last().map(|t| t.span.clone()).unwrap_or_default();
    let mut p = Parser {
        toks: layout(tokens),
        pos: 0,
        end,
    };
    p.module(name)
}

/// Parses a standalone expression (REPL input).
pub fn parse_expr(tokens: Vec<Token>) -> PResult<Term> {
    let end = tokens.last().map(|t| t.span.clone()).unwrap_or_default();
    let mut p = Parser {
        toks: layout(tokens),
        pos: 0,
        end,
    };
    p.expect(Tok::LBrace, "expression")?;
    let t = p.term()?;
    p.expect(Tok::RBrace, "end of input")?;
    p.finish()?;
    Ok(t)
}

/// Parses a standalone type expression.
pub fn parse_type(tokens: Vec<Token>) -> PResult<TypeExpr> {
    let end = tokens.last().map(|t| t.span.clone()).unwrap_or_default();
    let mut p = Parser {
        toks: layout(tokens),
        pos: 0,
        end,
    };
    p.expect(Tok::LBrace, "type")?;
    let t = p.ty()?;
    p.expect(Tok::RBrace, "end of input")?;
    p.finish()?;
    Ok(t)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .map_or_else(|| self.end.clone(), |t| t.span.clone())
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let found = match self.toks.get(self.pos) {
            None => "end of input".to_string(),
            Some(t) if t.virtual_ && t.tok == Tok::Semi => "new line".to_string(),
            Some(t) if t.virtual_ && t.tok == Tok::RBrace => "end of block".to_string(),
            Some(t) => format!("`{}`", t.tok),
        };
        Err(SyntaxError::Parse {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if self.peek() == Some(&tok) {
            Ok(self.bump())
        } else {
            self.error(&[what])
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            return self.error(&["end of input"]);
        }
        Ok(())
    }

    fn lower(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek() {
            Some(Tok::Lower(_)) => {
                let t = self.bump();
                let Tok::Lower(s) = t.tok else { unreachable!() };
                Ok((s, t.span))
            }
            _ => self.error(&[what]),
        }
    }

    fn upper(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek() {
            Some(Tok::Upper(_)) => {
                let t = self.bump();
                let Tok::Upper(s) = t.tok else { unreachable!() };
                Ok((s, t.span))
            }
            _ => self.error(&[what]),
        }
    }

    /// Items of a `{ a ; b ; c }` block; empty items are skipped.
    fn block<T>(
        &mut self,
        what: &str,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        self.expect(Tok::LBrace, what)?;
        let mut items = Vec::new();
        loop {
            while self.eat(&Tok::Semi) {}
            if self.eat(&Tok::RBrace) {
                return Ok(items);
            }
            items.push(item(self)?);
            match self.peek() {
                Some(Tok::Semi) | Some(Tok::RBrace) => {}
                _ => return self.error(&[";", "}"]),
            }
        }
    }

    fn module(&mut self, name: &str) -> PResult<SurfaceModule> {
        let mut module = SurfaceModule {
            name: name.to_string(),
            imports: Vec::new(),
            decls: Vec::new(),
        };
        if self.toks.is_empty() {
            return Ok(module);
        }
        let items = self.block("declaration", |p| p.top_item())?;
        self.finish()?;
        for item in items {
            match item {
                TopItem::Import(i) => {
                    if !module.decls.is_empty() {
                        return Err(SyntaxError::Parse {
                            span: i.span,
                            expected: vec!["declaration".into()],
                            found: "`import` after declarations".into(),
                        });
                    }
                    module.imports.push(i)
                }
                TopItem::Decl(d) => module.decls.push(d),
            }
        }
        Ok(module)
    }

    fn top_item(&mut self) -> PResult<TopItem> {
        match self.peek() {
            Some(Tok::Import) => {
                let span = self.bump().span;
                let (module, _) = self.upper("module name")?;
                Ok(TopItem::Import(Import { module, span }))
            }
            Some(Tok::Data) => Ok(TopItem::Decl(Decl::Data(self.data_decl()?))),
            Some(Tok::Lower(_)) if self.peek_at(1) == Some(&Tok::Colon) => {
                let (name, span) = self.lower("name")?;
                self.bump();
                let ty = self.ty()?;
                Ok(TopItem::Decl(Decl::Annotation(TypeAnnotation {
                    name,
                    ty,
                    span,
                })))
            }
            Some(Tok::Lower(_)) => {
                let (name, patterns, body, span) = self.equation()?;
                Ok(TopItem::Decl(Decl::Clause(FunClause {
                    name,
                    patterns,
                    body,
                    span,
                })))
            }
            _ => self.error(&[
                "`data`",
                "`import`",
                "function definition",
                "type annotation",
            ]),
        }
    }

    fn data_decl(&mut self) -> PResult<DataDecl> {
        let span = self.expect(Tok::Data, "`data`")?.span;
        let (name, _) = self.upper("type name")?;
        let mut params = Vec::new();
        while let Some(Tok::Lower(_)) = self.peek() {
            params.push(self.lower("type variable")?.0);
        }
        self.expect(Tok::Eq, "`=`")?;
        let mut ctors = vec![self.ctor_decl()?];
        while self.eat(&Tok::Bar) {
            ctors.push(self.ctor_decl()?);
        }
        Ok(DataDecl {
            name,
            params,
            ctors,
            span,
        })
    }

    fn ctor_decl(&mut self) -> PResult<CtorDecl> {
        if self.eat(&Tok::LParen) {
            let c = self.ctor_decl()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(c);
        }
        let (name, span) = self.upper("constructor name")?;
        let mut fields = Vec::new();
        while self.starts_atype() {
            fields.push(self.atype()?);
        }
        Ok(CtorDecl { name, fields, span })
    }

    fn starts_atype(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Upper(_) | Tok::Lower(_) | Tok::LParen)
        )
    }

    pub(crate) fn ty(&mut self) -> PResult<TypeExpr> {
        let dom = self.btype()?;
        if self.eat(&Tok::Arrow) {
            let cod = self.ty()?;
            return Ok(TypeExpr::Arrow(Box::new(dom), Box::new(cod)));
        }
        Ok(dom)
    }

    fn btype(&mut self) -> PResult<TypeExpr> {
        if let Some(Tok::Upper(_)) = self.peek() {
            let (name, _) = self.upper("type")?;
            let mut args = Vec::new();
            while self.starts_atype() {
                args.push(self.atype()?);
            }
            return Ok(TypeExpr::Con(name, args));
        }
        self.atype()
    }

    fn atype(&mut self) -> PResult<TypeExpr> {
        match self.peek() {
            Some(Tok::Upper(_)) => Ok(TypeExpr::Con(self.upper("type")?.0, Vec::new())),
            Some(Tok::Lower(_)) => Ok(TypeExpr::Var(self.lower("type variable")?.0)),
            Some(Tok::LParen) => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.error(&["type"]),
        }
    }

    /// `name pat* = term`
    fn equation(&mut self) -> PResult<(String, Vec<Pattern>, Term, Span)> {
        let (name, span) = self.lower("function name")?;
        let mut patterns = Vec::new();
        while self.peek() != Some(&Tok::Eq) {
            patterns.push(self.apat()?);
        }
        self.bump();
        let body = self.term()?;
        Ok((name, patterns, body, span))
    }

    fn starts_apat(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Upper(_) | Tok::Lower(_) | Tok::LParen | Tok::Underscore)
        )
    }

    fn apat(&mut self) -> PResult<Pattern> {
        match self.peek() {
            Some(Tok::Lower(_)) => {
                let (v, s) = self.lower("variable")?;
                Ok(Pattern::Var(v, s))
            }
            Some(Tok::Underscore) => Ok(Pattern::Wildcard(self.bump().span)),
            Some(Tok::Upper(_)) => {
                let (c, s) = self.upper("constructor")?;
                Ok(Pattern::Ctor(c, Vec::new(), s))
            }
            Some(Tok::LParen) => {
                self.bump();
                let p = self.pattern()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(p)
            }
            _ => self.error(&["pattern", "`=`"]),
        }
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        if let Some(Tok::Upper(_)) = self.peek() {
            let (c, s) = self.upper("constructor")?;
            let mut args = Vec::new();
            while self.starts_apat() {
                args.push(self.apat()?);
            }
            return Ok(Pattern::Ctor(c, args, s));
        }
        self.apat()
    }

    pub(crate) fn term(&mut self) -> PResult<Term> {
        match self.peek() {
            Some(Tok::Backslash) => self.lambda(),
            Some(Tok::Let) => self.let_term(),
            Some(Tok::If) => self.if_term(),
            Some(Tok::Case) => self.case_term(),
            _ => self.application(),
        }
    }

    fn lambda(&mut self) -> PResult<Term> {
        let span = self.expect(Tok::Backslash, "`\\`")?.span;
        let mut vars = vec![self.lower("parameter")?];
        while let Some(Tok::Lower(_)) = self.peek() {
            vars.push(self.lower("parameter")?);
        }
        self.expect(Tok::Dot, "`.`")?;
        let mut body = self.term()?;
        for (v, s) in vars.into_iter().rev() {
            body = Term::new(TermKind::Lam(v, Box::new(body)), s);
        }
        body.span = span;
        Ok(body)
    }

    fn let_term(&mut self) -> PResult<Term> {
        let span = self.expect(Tok::Let, "`let`")?.span;
        let items = self.block("let binding", |p| {
            if let (Some(Tok::Lower(_)), Some(Tok::Colon)) = (p.peek(), p.peek_at(1)) {
                let (name, _) = p.lower("name")?;
                p.bump();
                Ok(LetItem::Annotation(name, p.ty()?))
            } else {
                let (name, patterns, body, span) = p.equation()?;
                Ok(LetItem::Binding(LetBinding {
                    name,
                    patterns,
                    annotation: None,
                    body,
                    span,
                }))
            }
        })?;
        self.expect(Tok::In, "`in`")?;
        let body = self.term()?;

        let mut bindings = Vec::new();
        let mut pending: Option<(String, TypeExpr)> = None;
        for item in items {
            match item {
                LetItem::Annotation(name, ty) => pending = Some((name, ty)),
                LetItem::Binding(mut b) => {
                    if let Some((name, ty)) = pending.take() {
                        if name == b.name {
                            b.annotation = Some(ty);
                        }
                    }
                    bindings.push(b);
                }
            }
        }
        if bindings.is_empty() {
            return Err(SyntaxError::Parse {
                span,
                expected: vec!["let binding".into()],
                found: "empty `let`".into(),
            });
        }
        Ok(Term::new(TermKind::Let(bindings, Box::new(body)), span))
    }

    fn if_term(&mut self) -> PResult<Term> {
        let span = self.expect(Tok::If, "`if`")?.span;
        let c = self.term()?;
        self.expect(Tok::Then, "`then`")?;
        let t = self.term()?;
        self.expect(Tok::Else, "`else`")?;
        let e = self.term()?;
        Ok(Term::new(
            TermKind::If(Box::new(c), Box::new(t), Box::new(e)),
            span,
        ))
    }

    fn case_term(&mut self) -> PResult<Term> {
        let span = self.expect(Tok::Case, "`case`")?.span;
        let scrutinee = self.term()?;
        self.expect(Tok::Of, "`of`")?;
        let branches = self.block("case alternative", |p| {
            let pattern = p.pattern()?;
            p.expect(Tok::FatArrow, "`=>`")?;
            let body = p.term()?;
            Ok(Branch { pattern, body })
        })?;
        if branches.is_empty() {
            return Err(SyntaxError::Parse {
                span,
                expected: vec!["case alternative".into()],
                found: "empty `case`".into(),
            });
        }
        Ok(Term::new(
            TermKind::Case(Box::new(scrutinee), branches),
            span,
        ))
    }

    fn starts_aterm(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Tok::Lower(_)
                    | Tok::Upper(_)
                    | Tok::Prim(_)
                    | Tok::Int(_)
                    | Tok::LParen
                    | Tok::Backslash
                    | Tok::Let
                    | Tok::If
                    | Tok::Case
            )
        )
    }

    fn application(&mut self) -> PResult<Term> {
        let mut head = self.aterm()?;
        while self.starts_aterm() {
            let arg = self.aterm()?;
            head = Term::app(head, arg);
        }
        Ok(head)
    }

    fn aterm(&mut self) -> PResult<Term> {
        let span = self.span();
        let kind = match self.peek() {
            Some(Tok::Lower(_)) => TermKind::Var(self.lower("variable")?.0),
            Some(Tok::Upper(_)) => TermKind::Ctor(self.upper("constructor")?.0),
            Some(Tok::Prim(p)) => {
                let p = p.clone();
                self.bump();
                TermKind::Prim(p)
            }
            Some(Tok::Int(n)) => {
                let n = *n;
                self.bump();
                TermKind::Lit(n)
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(t);
            }
            Some(Tok::Backslash | Tok::Let | Tok::If | Tok::Case) => return self.term(),
            _ => return self.error(&["expression"]),
        };
        Ok(Term::new(kind, span))
    }
}

enum TopItem {
    Import(Import),
    Decl(Decl),
}

enum LetItem {
    Annotation(String, TypeExpr),
    Binding(LetBinding),
}

#[cfg(test)]
mod tests {
    use super::super::lexer::lex;
    use super::*;

    fn parse(src: &str) -> PResult<SurfaceModule> {
        parse_module("T", lex("t.lm", src)?)
    }

    fn con(n: &str, args: Vec<TypeExpr>) -> TypeExpr {
        TypeExpr::Con(n.into(), args)
    }

    #[test]
    fn list_data_declaration() {
        let m = parse("data List a = Nil | Cons a (List a)").unwrap();
        let Decl::Data(d) = &m.decls[0] else { panic!() };
        assert_eq!(d.name, "List");
        assert_eq!(d.params, vec!["a"]);
        assert_eq!(d.ctors.len(), 2);
        assert_eq!(
            (d.ctors[0].name.as_str(), d.ctors[0].fields.len()),
            ("Nil", 0)
        );
        assert_eq!(d.ctors[1].name, "Cons");
        assert_eq!(
            d.ctors[1].fields,
            vec![
                TypeExpr::Var("a".into()),
                con("List", vec![TypeExpr::Var("a".into())])
            ]
        );
    }

    #[test]
    fn parenthesised_constructor_alternative() {
        let m = parse("data List a = (Cons a (List a)) | Nil").unwrap();
        let Decl::Data(d) = &m.decls[0] else { panic!() };
        assert_eq!(d.ctors[0].name, "Cons");
        assert_eq!(d.ctors[0].fields.len(), 2);
    }

    #[test]
    fn layout_case_clause() {
        let src = "cond b = case b of\n           False => S Z\n           True  => Z\n";
        let m = parse(src).unwrap();
        let Decl::Clause(c) = &m.decls[0] else {
            panic!()
        };
        let TermKind::Case(_, branches) = &c.body.kind else {
            panic!("{:?}", c.body)
        };
        assert_eq!(branches.len(), 2);
        let braced = parse("cond b = case b of { False => S Z ; True => Z }").unwrap();
        assert_eq!(m, braced);
    }

    #[test]
    fn malformed_equation_is_a_parse_error() {
        match parse("f = )") {
            Err(SyntaxError::Parse { span, expected, .. }) => {
                assert_eq!((span.line, span.col), (1, 5));
                assert!(expected.contains(&"expression".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lambda_sugar_nests() {
        let m = parse("k = \\x y . x").unwrap();
        let Decl::Clause(c) = &m.decls[0] else {
            panic!()
        };
        let TermKind::Lam(x, inner) = &c.body.kind else {
            panic!()
        };
        assert_eq!(x, "x");
        assert!(matches!(&inner.kind, TermKind::Lam(y, _) if y == "y"));
    }

    #[test]
    fn application_is_left_associative() {
        let m = parse("main = plus 1 1").unwrap();
        let Decl::Clause(c) = &m.decls[0] else {
            panic!()
        };
        let TermKind::App(f, a) = &c.body.kind else {
            panic!()
        };
        assert!(matches!(a.kind, TermKind::Lit(1)));
        assert!(
            matches!(&f.kind, TermKind::App(g, _) if matches!(&g.kind, TermKind::Var(v) if v == "plus"))
        );
    }

    #[test]
    fn multi_line_if_clause() {
        let src = "remove eqFunc ele (Cons hd tl) =\n  if eqFunc ele hd\n    then tl\n    else Cons hd (remove eqFunc ele tl)\nremove _ _ Nil = Nil\n";
        let m = parse(src).unwrap();
        assert_eq!(m.decls.len(), 2);
        let Decl::Clause(c) = &m.decls[0] else {
            panic!()
        };
        assert_eq!(c.patterns.len(), 3);
        assert!(matches!(c.body.kind, TermKind::If(..)));
    }

    #[test]
    fn annotations_and_imports() {
        let m = parse("import StdLib\nplus : Nat -> Nat -> Nat\nplus a b = a").unwrap();
        assert_eq!(m.imports[0].module, "StdLib");
        let Decl::Annotation(a) = &m.decls[0] else {
            panic!()
        };
        assert_eq!(
            a.ty,
            TypeExpr::Arrow(
                Box::new(con("Nat", vec![])),
                Box::new(TypeExpr::Arrow(
                    Box::new(con("Nat", vec![])),
                    Box::new(con("Nat", vec![]))
                ))
            )
        );
    }

    #[test]
    fn let_annotation_attaches_to_binding() {
        let m = parse("f = let\n      n : Nat\n      n = 3\n    in n").unwrap();
        let Decl::Clause(c) = &m.decls[0] else {
            panic!()
        };
        let TermKind::Let(bs, _) = &c.body.kind else {
            panic!()
        };
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].annotation, Some(con("Nat", vec![])));
    }

    #[test]
    fn empty_case_rejected() {
        assert!(parse("f x = case x of {}").is_err());
    }
}
