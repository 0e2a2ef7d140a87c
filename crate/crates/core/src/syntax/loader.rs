//! Import resolution and merging of modules into one program.
//!
//! Every module contributes its data types, constructors and functions to a
//! single namespace. A name defined by exactly one module keeps its plain
//! spelling; a name defined by several modules is renamed to `Module.name`
//! in each of them and may then only be referenced in qualified form.

use std::collections::{HashMap, HashSet};
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use super::ast::*;
use super::{parse_source, SyntaxError};

/// Source of the types every program may use without declaring them.
/// A declaration in user code with the same type name replaces the built-in.
pub const PRELUDE_BOOL: &str = "data Bool = False | True";
pub const PRELUDE_NAT: &str = "data Nat = S Nat | Z";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{path}: cannot read file: {message}")]
    Io { path: String, message: String },
    #[error("{span}: module `{name}` not found in any search path")]
    ImportNotFound { name: String, span: Span },
    #[error("{span}: cyclic import: {}", cycle.join(" -> "))]
    CyclicImport { cycle: Vec<String>, span: Span },
    #[error("{span}: `{name}` is defined more than once{}", if modules.is_empty() { String::new() } else { format!(" (in {}); qualify the reference", modules.join(", ")) })]
    DuplicateName {
        name: String,
        modules: Vec<String>,
        span: Span,
    },
    #[error("{span}: clauses of `{name}` take different numbers of arguments")]
    ClauseArity { name: String, span: Span },
    #[error("{span}: variable `{name}` is bound twice in the same pattern list")]
    DuplicateBinder { name: String, span: Span },
    #[error("{span}: type annotation for `{name}` has no accompanying definition")]
    OrphanAnnotation { name: String, span: Span },
    #[error("{span}: no `main` function is defined")]
    MissingMain { span: Span },
}

impl LoadError {
    pub fn span(&self) -> Option<&Span> {
        match self {
            LoadError::Syntax(e) => Some(e.span()),
            LoadError::Io { .. } => None,
            LoadError::ImportNotFound { span, .. }
            | LoadError::CyclicImport { span, .. }
            | LoadError::DuplicateName { span, .. }
            | LoadError::ClauseArity { span, .. }
            | LoadError::DuplicateBinder { span, .. }
            | LoadError::OrphanAnnotation { span, .. }
            | LoadError::MissingMain { span } => Some(span),
        }
    }
}

/// Search directories used by the command-line tools: the working directory,
/// `Massimult/LambdaM` below it, then every entry of `LAMBDAM`.
pub fn default_search_paths() -> Vec<PathBuf> {
    let cwd = env::current_dir().unwrap_or_else(|_| PathBuf::from("."));
    let mut paths = vec![cwd.clone(), cwd.join("Massimult").join("LambdaM")];
    if let Some(extra) = env::var_os("LAMBDAM") {
        paths.extend(env::split_paths(&extra).filter(|p| !p.as_os_str().is_empty()));
    }
    paths
}

/// Loads `entry` and everything it imports. Imports are looked up in the
/// importing file's directory first, then in `search_paths` in order.
pub fn load_program(entry: &Path, search_paths: &[PathBuf]) -> Result<SurfaceProgram, LoadError> {
    let source = read(entry)?;
    let name = entry
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("Main")
        .to_string();
    let file = entry.display().to_string();
    let module = parse_source(&name, &file, &source)?;
    let mut loader = Loader {
        search: search_paths,
        modules: Vec::new(),
        done: HashSet::new(),
        stack: Vec::new(),
    };
    loader.visit(module, entry.parent())?;
    merge(
        loader.modules,
        &name,
        Span::new(Arc::from(file.as_str()), 1, 1),
    )
}

/// Loads a program whose entry module is given as text. Imports are looked
/// up in `search_paths` only.
pub fn load_source(
    file: &str,
    source: &str,
    search_paths: &[PathBuf],
) -> Result<SurfaceProgram, LoadError> {
    let name = Path::new(file)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("Main")
        .to_string();
    let module = parse_source(&name, file, source)?;
    let mut loader = Loader {
        search: search_paths,
        modules: Vec::new(),
        done: HashSet::new(),
        stack: Vec::new(),
    };
    loader.visit(module, None)?;
    merge(loader.modules, &name, Span::new(Arc::from(file), 1, 1))
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

struct Loader<'a> {
    search: &'a [PathBuf],
    /// Modules in dependency order (imports before importers).
    modules: Vec<SurfaceModule>,
    done: HashSet<String>,
    stack: Vec<String>,
}

impl Loader<'_> {
    fn visit(&mut self, module: SurfaceModule, dir: Option<&Path>) -> Result<(), LoadError> {
        self.stack.push(module.name.clone());
        let mut seen = HashSet::new();
        for import in &module.imports {
            if !seen.insert(import.module.as_str()) {
                continue;
            }
            if let Some(pos) = self.stack.iter().position(|m| *m == import.module) {
                let mut cycle = self.stack[pos..].to_vec();
                cycle.push(import.module.clone());
                return Err(LoadError::CyclicImport {
                    cycle,
                    span: import.span.clone(),
                });
            }
            if self.done.contains(&import.module) {
                continue;
            }
            let path = self
                .find(&import.module, dir)
                .ok_or_else(|| LoadError::ImportNotFound {
                    name: import.module.clone(),
                    span: import.span.clone(),
                })?;
            let source = read(&path)?;
            let parsed = parse_source(&import.module, &path.display().to_string(), &source)?;
            self.visit(parsed, path.parent())?;
        }
        self.stack.pop();
        self.done.insert(module.name.clone());
        self.modules.push(module);
        Ok(())
    }

    fn find(&self, module: &str, dir: Option<&Path>) -> Option<PathBuf> {
        let nested: PathBuf = module.split('.').collect::<PathBuf>().with_extension("lm");
        let flat = PathBuf::from(format!("{module}.lm"));
        dir.into_iter()
            .chain(self.search.iter().map(PathBuf::as_path))
            .flat_map(|d| [d.join(&nested), d.join(&flat)])
            .find(|p| p.is_file())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Ns {
    Value,
    Ctor,
    Type,
}

/// Defining modules of every top-level name, per namespace.
struct Names {
    owners: HashMap<(Ns, String), Vec<String>>,
}

impl Names {
    fn canonical(&self, ns: Ns, module: &str, name: &str) -> String {
        match self.owners.get(&(ns, name.to_string())) {
            Some(ms) if ms.len() > 1 => format!("{module}.{name}"),
            _ => name.to_string(),
        }
    }

    fn resolve(&self, ns: Ns, reference: &str, span: &Span) -> Result<String, LoadError> {
        if let Some(ms) = self.owners.get(&(ns, reference.to_string())) {
            if ms.len() > 1 {
                return Err(LoadError::DuplicateName {
                    name: reference.to_string(),
                    modules: ms.clone(),
                    span: span.clone(),
                });
            }
            return Ok(reference.to_string());
        }
        if let Some((module, name)) = reference.rsplit_once('.') {
            if let Some(ms) = self.owners.get(&(ns, name.to_string())) {
                if ms.iter().any(|m| m == module) {
                    return Ok(self.canonical(ns, module, name));
                }
            }
        }
        // Unknown names are reported by the type checker.
        Ok(reference.to_string())
    }
}

fn merge(
    mut modules: Vec<SurfaceModule>,
    entry: &str,
    origin: Span,
) -> Result<SurfaceProgram, LoadError> {
    let declares = |ty: &str| {
        modules.iter().any(|m| {
            m.decls
                .iter()
                .any(|d| matches!(d, Decl::Data(d) if d.name == ty))
        })
    };
    let mut prelude = Vec::new();
    if !declares("Bool") {
        prelude.push(PRELUDE_BOOL);
    }
    if !declares("Nat") {
        prelude.push(PRELUDE_NAT);
    }
    if !prelude.is_empty() {
        let m = parse_source("Prelude", "<prelude>", &prelude.join("\n")).expect("prelude parses");
        modules.insert(0, m);
    }

    let mut names = Names {
        owners: HashMap::new(),
    };
    let mut grouped = Vec::new();
    for m in &modules {
        let (data, funs) = group_module(m)?;
        for d in &data {
            let mut ctors = HashSet::new();
            for c in &d.ctors {
                if !ctors.insert(c.name.as_str()) {
                    return Err(LoadError::DuplicateName {
                        name: c.name.clone(),
                        modules: vec![],
                        span: c.span.clone(),
                    });
                }
                names
                    .owners
                    .entry((Ns::Ctor, c.name.clone()))
                    .or_default()
                    .push(m.name.clone());
            }
            let owners = names.owners.entry((Ns::Type, d.name.clone())).or_default();
            if owners.contains(&m.name) {
                return Err(LoadError::DuplicateName {
                    name: d.name.clone(),
                    modules: vec![],
                    span: d.span.clone(),
                });
            }
            owners.push(m.name.clone());
        }
        for f in &funs {
            names
                .owners
                .entry((Ns::Value, f.name.clone()))
                .or_default()
                .push(m.name.clone());
        }
        grouped.push((m.name.clone(), data, funs));
    }
    for ((_, name), owners) in &names.owners {
        let mut uniq = owners.clone();
        uniq.dedup();
        if uniq.len() != owners.len() {
            return Err(LoadError::DuplicateName {
                name: name.clone(),
                modules: vec![],
                span: origin.clone(),
            });
        }
    }

    let mut program = SurfaceProgram {
        data: Vec::new(),
        bindings: Vec::new(),
        entry: String::new(),
        origin,
    };
    for (module, data, funs) in grouped {
        for mut d in data {
            d.name = names.canonical(Ns::Type, &module, &d.name);
            for c in &mut d.ctors {
                c.name = names.canonical(Ns::Ctor, &module, &c.name);
                for f in &mut c.fields {
                    resolve_type(&names, f, &c.span)?;
                }
            }
            program.data.push(d);
        }
        for mut f in funs {
            if module == entry && f.name == "main" {
                program.entry = names.canonical(Ns::Value, &module, "main");
            }
            f.name = names.canonical(Ns::Value, &module, &f.name);
            if let Some(a) = &mut f.annotation {
                resolve_type(&names, a, &f.span)?;
            }
            for c in &mut f.clauses {
                let mut scope = Vec::new();
                for p in &mut c.patterns {
                    resolve_pattern(&names, p, &mut scope)?;
                }
                resolve_term(&names, &mut c.body, &mut scope)?;
            }
            program.bindings.push(f);
        }
    }
    if program.entry.is_empty() {
        return Err(LoadError::MissingMain {
            span: program.origin.clone(),
        });
    }
    Ok(program)
}

/// Splits a module into data declarations and grouped functions, checking
/// clause adjacency, arity agreement and pattern-variable distinctness.
fn group_module(m: &SurfaceModule) -> Result<(Vec<DataDecl>, Vec<FunDef>), LoadError> {
    let mut data = Vec::new();
    let mut funs: Vec<FunDef> = Vec::new();
    let mut annotations: HashMap<String, TypeAnnotation> = HashMap::new();
    let mut last_clause: Option<String> = None;
    for d in &m.decls {
        match d {
            Decl::Data(d) => {
                data.push(d.clone());
                last_clause = None;
            }
            Decl::Annotation(a) => {
                if annotations.insert(a.name.clone(), a.clone()).is_some() {
                    return Err(LoadError::DuplicateName {
                        name: a.name.clone(),
                        modules: vec![],
                        span: a.span.clone(),
                    });
                }
                last_clause = None;
            }
            Decl::Clause(c) => {
                check_binders(&c.patterns)?;
                let clause = Clause {
                    patterns: c.patterns.clone(),
                    body: c.body.clone(),
                    span: c.span.clone(),
                };
                if last_clause.as_deref() == Some(c.name.as_str()) {
                    let f = funs.last_mut().expect("grouped function");
                    if f.arity() != c.patterns.len() {
                        return Err(LoadError::ClauseArity {
                            name: c.name.clone(),
                            span: c.span.clone(),
                        });
                    }
                    f.clauses.push(clause);
                } else {
                    if funs.iter().any(|f| f.name == c.name) {
                        return Err(LoadError::DuplicateName {
                            name: c.name.clone(),
                            modules: vec![],
                            span: c.span.clone(),
                        });
                    }
                    funs.push(FunDef {
                        name: c.name.clone(),
                        annotation: None,
                        clauses: vec![clause],
                        span: c.span.clone(),
                    });
                    last_clause = Some(c.name.clone());
                }
            }
        }
    }
    for (name, a) in annotations {
        match funs.iter_mut().find(|f| f.name == name) {
            Some(f) => f.annotation = Some(a.ty),
            None => return Err(LoadError::OrphanAnnotation { name, span: a.span }),
        }
    }
    Ok((data, funs))
}

fn check_binders(patterns: &[Pattern]) -> Result<(), LoadError> {
    let mut seen = HashSet::new();
    let mut stack: Vec<&Pattern> = patterns.iter().collect();
    while let Some(p) = stack.pop() {
        match p {
            Pattern::Var(v, s) => {
                if !seen.insert(v.as_str()) {
                    return Err(LoadError::DuplicateBinder {
                        name: v.clone(),
                        span: s.clone(),
                    });
                }
            }
            Pattern::Wildcard(_) => {}
            Pattern::Ctor(_, ps, _) => stack.extend(ps.iter()),
        }
    }
    Ok(())
}

fn resolve_type(names: &Names, t: &mut TypeExpr, span: &Span) -> Result<(), LoadError> {
    match t {
        TypeExpr::Var(_) => Ok(()),
        TypeExpr::Con(n, args) => {
            *n = names.resolve(Ns::Type, n, span)?;
            args.iter_mut()
                .try_for_each(|a| resolve_type(names, a, span))
        }
        TypeExpr::Arrow(a, b) => {
            resolve_type(names, a, span)?;
            resolve_type(names, b, span)
        }
    }
}

fn resolve_pattern(
    names: &Names,
    p: &mut Pattern,
    scope: &mut Vec<String>,
) -> Result<(), LoadError> {
    match p {
        Pattern::Var(v, _) => scope.push(v.clone()),
        Pattern::Wildcard(_) => {}
        Pattern::Ctor(c, ps, span) => {
            *c = names.resolve(Ns::Ctor, c, span)?;
            for p in ps {
                resolve_pattern(names, p, scope)?;
            }
        }
    }
    Ok(())
}

fn resolve_term(names: &Names, t: &mut Term, scope: &mut Vec<String>) -> Result<(), LoadError> {
    let span = t.span.clone();
    match &mut t.kind {
        TermKind::Var(v) => {
            if !scope.iter().any(|s| s == v) {
                *v = names.resolve(Ns::Value, v, &span)?;
            }
        }
        TermKind::Ctor(c) => *c = names.resolve(Ns::Ctor, c, &span)?,
        TermKind::Prim(_) | TermKind::Lit(_) => {}
        TermKind::App(f, a) => {
            resolve_term(names, f, scope)?;
            resolve_term(names, a, scope)?;
        }
        TermKind::Lam(v, b) => {
            scope.push(v.clone());
            resolve_term(names, b, scope)?;
            scope.pop();
        }
        TermKind::If(c, a, b) => {
            resolve_term(names, c, scope)?;
            resolve_term(names, a, scope)?;
            resolve_term(names, b, scope)?;
        }
        TermKind::Case(s, branches) => {
            resolve_term(names, s, scope)?;
            for b in branches {
                let depth = scope.len();
                resolve_pattern(names, &mut b.pattern, scope)?;
                check_binders(std::slice::from_ref(&b.pattern))?;
                resolve_term(names, &mut b.body, scope)?;
                scope.truncate(depth);
            }
        }
        TermKind::Let(bindings, body) => {
            check_let_group(bindings)?;
            let depth = scope.len();
            scope.extend(bindings.iter().map(|b| b.name.clone()));
            for b in bindings.iter_mut() {
                if let Some(a) = &mut b.annotation {
                    resolve_type(names, a, &b.span)?;
                }
                check_binders(&b.patterns)?;
                let inner = scope.len();
                for p in &mut b.patterns {
                    resolve_pattern(names, p, scope)?;
                }
                resolve_term(names, &mut b.body, scope)?;
                scope.truncate(inner);
            }
            resolve_term(names, body, scope)?;
            scope.truncate(depth);
        }
    }
    Ok(())
}

/// Adjacent same-name clauses form one function; any other repetition of a
/// name in one `let` is an error.
fn check_let_group(bindings: &[LetBinding]) -> Result<(), LoadError> {
    let mut finished: HashSet<&str> = HashSet::new();
    let mut current: Option<(&str, usize)> = None;
    for b in bindings {
        match current {
            Some((name, arity)) if name == b.name => {
                if arity != b.patterns.len() {
                    return Err(LoadError::ClauseArity {
                        name: b.name.clone(),
                        span: b.span.clone(),
                    });
                }
            }
            _ => {
                if let Some((name, _)) = current {
                    finished.insert(name);
                }
                if finished.contains(b.name.as_str()) {
                    return Err(LoadError::DuplicateName {
                        name: b.name.clone(),
                        modules: vec![],
                        span: b.span.clone(),
                    });
                }
                current = Some((&b.name, b.patterns.len()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_file_program() {
        let p = load_source("Main.lm", "main = Z", &[]).unwrap();
        assert_eq!(p.bindings.len(), 1);
        assert_eq!(p.entry, "main");
        assert!(p.data.iter().any(|d| d.name == "Nat"));
        assert!(p.data.iter().any(|d| d.name == "Bool"));
    }

    #[test]
    fn user_nat_replaces_builtin() {
        let p = load_source("Main.lm", "data Nat = Z | S Nat\nmain = Z", &[]).unwrap();
        let nats: Vec<_> = p.data.iter().filter(|d| d.name == "Nat").collect();
        assert_eq!(nats.len(), 1);
        assert_eq!(nats[0].ctors[0].name, "Z");
    }

    #[test]
    fn missing_main() {
        assert!(matches!(
            load_source("Main.lm", "f x = x", &[]),
            Err(LoadError::MissingMain { .. })
        ));
    }

    #[test]
    fn clause_grouping_rules() {
        assert!(matches!(
            load_source("M.lm", "f Z = Z\ng = Z\nf (S n) = n\nmain = Z", &[]),
            Err(LoadError::DuplicateName { .. })
        ));
        assert!(matches!(
            load_source("M.lm", "f Z = Z\nf a b = a\nmain = Z", &[]),
            Err(LoadError::ClauseArity { .. })
        ));
        assert!(matches!(
            load_source("M.lm", "f a a = a\nmain = Z", &[]),
            Err(LoadError::DuplicateBinder { .. })
        ));
        let p = load_source(
            "M.lm",
            "f : Nat -> Nat\nf Z = Z\nf (S n) = n\nmain = f Z",
            &[],
        )
        .unwrap();
        let f = p.binding("f").unwrap();
        assert_eq!(f.clauses.len(), 2);
        assert!(f.annotation.is_some());
    }
}
