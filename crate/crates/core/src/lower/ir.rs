use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::prim::op_name;
use crate::typecheck::{CtorInfo, DataInfo};

/// Intermediate form between pattern compilation and the final
/// [`super::CoreTerm`]. All local binders carry unique names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ir {
    Var(String),
    App(Box<Ir>, Box<Ir>),
    Lam(String, Box<Ir>),
    /// A binding group. Until recursion is resolved the bindings are
    /// mutually visible; afterwards each one sees only earlier ones.
    Let(Vec<(String, Ir)>, Box<Ir>),
    /// Depth-one case over data type `.1`: one branch per constructor in
    /// declaration order, each binding that constructor's fields.
    Case(Box<Ir>, String, Vec<(Vec<String>, Ir)>),
    Ctor(String),
    Prim(u32),
    Int(i64),
    Y,
}

impl Ir {
    pub fn app(f: Ir, a: Ir) -> Ir {
        Ir::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Ir, args: impl IntoIterator<Item = Ir>) -> Ir {
        args.into_iter().fold(f, Ir::app)
    }

    pub fn lams(vs: &[String], body: Ir) -> Ir {
        vs.iter()
            .rev()
            .fold(body, |acc, v| Ir::Lam(v.clone(), Box::new(acc)))
    }

    /// Free variables, in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Ir::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Ir::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Ir::Lam(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Ir::Let(bs, body) => {
                let depth = bound.len();
                bound.extend(bs.iter().map(|(n, _)| n.clone()));
                for (_, e) in bs {
                    e.collect_free(bound, out);
                }
                body.collect_free(bound, out);
                bound.truncate(depth);
            }
            Ir::Case(s, _, branches) => {
                s.collect_free(bound, out);
                for (vs, b) in branches {
                    let depth = bound.len();
                    bound.extend(vs.iter().cloned());
                    b.collect_free(bound, out);
                    bound.truncate(depth);
                }
            }
            Ir::Ctor(_) | Ir::Prim(_) | Ir::Int(_) | Ir::Y => {}
        }
    }

    /// Replaces free occurrences of variables by terms. Binders are unique
    /// and replacement terms only mention fresh names, so no renaming is
    /// needed.
    pub fn replace(&self, map: &HashMap<String, Ir>) -> Ir {
        match self {
            Ir::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Ir::App(f, a) => Ir::app(f.replace(map), a.replace(map)),
            Ir::Lam(v, b) => Ir::Lam(v.clone(), Box::new(b.replace(map))),
            Ir::Let(bs, body) => Ir::Let(
                bs.iter()
                    .map(|(n, e)| (n.clone(), e.replace(map)))
                    .collect(),
                Box::new(body.replace(map)),
            ),
            Ir::Case(s, d, branches) => Ir::Case(
                Box::new(s.replace(map)),
                d.clone(),
                branches
                    .iter()
                    .map(|(vs, b)| (vs.clone(), b.replace(map)))
                    .collect(),
            ),
            _ => self.clone(),
        }
    }

    /// True when no `Case`, `Ctor` or `Let` node remains.
    pub fn is_core(&self) -> bool {
        match self {
            Ir::Case(..) | Ir::Ctor(_) | Ir::Let(..) => false,
            Ir::App(f, a) => f.is_core() && a.is_core(),
            Ir::Lam(_, b) => b.is_core(),
            _ => true,
        }
    }
}

impl fmt::Display for Ir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ir(f, self, 0)
    }
}

fn write_ir(f: &mut fmt::Formatter<'_>, t: &Ir, prec: u8) -> fmt::Result {
    let open =
        |f: &mut fmt::Formatter<'_>, need: bool| if need { f.write_str("(") } else { Ok(()) };
    let close =
        |f: &mut fmt::Formatter<'_>, need: bool| if need { f.write_str(")") } else { Ok(()) };
    match t {
        Ir::Var(v) | Ir::Ctor(v) => f.write_str(v),
        Ir::Prim(id) => write!(f, "#{}", op_name(*id)),
        Ir::Int(n) => write!(f, "{n}"),
        Ir::Y => f.write_str("Y"),
        Ir::App(a, b) => {
            open(f, prec > 1)?;
            write_ir(f, a, 1)?;
            f.write_str(" ")?;
            write_ir(f, b, 2)?;
            close(f, prec > 1)
        }
        Ir::Lam(v, b) => {
            open(f, prec > 0)?;
            write!(f, "\\{v} . ")?;
            write_ir(f, b, 0)?;
            close(f, prec > 0)
        }
        Ir::Let(bs, body) => {
            open(f, prec > 0)?;
            f.write_str("let {")?;
            for (i, (n, e)) in bs.iter().enumerate() {
                f.write_str(if i == 0 { " " } else { " ; " })?;
                write!(f, "{n} = ")?;
                write_ir(f, e, 0)?;
            }
            f.write_str(" } in ")?;
            write_ir(f, body, 0)?;
            close(f, prec > 0)
        }
        Ir::Case(s, d, branches) => {
            open(f, prec > 0)?;
            f.write_str("case ")?;
            write_ir(f, s, 0)?;
            write!(f, " of {d} {{")?;
            for (i, (vs, b)) in branches.iter().enumerate() {
                f.write_str(if i == 0 { " " } else { " ; " })?;
                write!(f, "#{i}")?;
                for v in vs {
                    write!(f, " {v}")?;
                }
                f.write_str(" => ")?;
                write_ir(f, b, 0)?;
            }
            f.write_str(" }")?;
            close(f, prec > 0)
        }
    }
}

/// A whole program between lowering stages.
#[derive(Clone, Debug)]
pub struct SimpleProgram {
    pub bindings: Vec<(String, Ir)>,
    pub entry: String,
    pub ctors: HashMap<String, CtorInfo>,
    pub data: BTreeMap<String, DataInfo>,
    /// Counter for generating binder names that cannot clash.
    pub next_fresh: usize,
}

impl SimpleProgram {
    pub fn binding(&self, name: &str) -> Option<&Ir> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }

    pub fn fresh(&mut self, base: &str) -> String {
        self.next_fresh += 1;
        fresh_ir_name(base, self.next_fresh)
    }
}

/// Generated names contain `%`, which no source identifier can.
pub fn fresh_ir_name(base: &str, n: usize) -> String {
    let stem = base.split('%').next().unwrap_or(base);
    format!("{stem}%{n}")
}
