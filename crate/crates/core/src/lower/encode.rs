//! Scott encoding, recursion through `Y`, and let elimination.

use std::collections::HashMap;

use super::core::CoreTerm;
use super::ir::{Ir, SimpleProgram};
use super::LowerError;
use crate::deps;

/// The Scott encoding of constructor `index` of a type with `count`
/// constructors and `arity` fields: `\v1 .. vn f1 .. fm . fi v1 .. vn`.
pub fn scott_ctor(index: usize, count: usize, arity: usize) -> CoreTerm {
    let vs: Vec<String> = (1..=arity).map(|i| format!("v{i}")).collect();
    let fs: Vec<String> = (1..=count).map(|i| format!("f{i}")).collect();
    let body = CoreTerm::apps(
        CoreTerm::var(&fs[index]),
        vs.iter().map(|v| CoreTerm::var(v)),
    );
    let mut binders = vs;
    binders.extend(fs);
    CoreTerm::lams(&binders, body)
}

/// Replaces every constructor by its Scott encoding and every case by an
/// application of the scrutinee to one function per branch.
pub fn encode_data(p: &SimpleProgram) -> SimpleProgram {
    let mut out = p.clone();
    let bindings = std::mem::take(&mut out.bindings);
    out.bindings = bindings
        .into_iter()
        .map(|(n, e)| (n, encode_ir(&mut out, &e)))
        .collect();
    out
}

fn encode_ir(p: &mut SimpleProgram, t: &Ir) -> Ir {
    match t {
        Ir::Ctor(c) => {
            let info = &p.ctors[c];
            let (index, count, arity) = (info.index, info.count, info.arity());
            let vs: Vec<String> = (0..arity).map(|_| p.fresh("v")).collect();
            let fs: Vec<String> = (0..count).map(|_| p.fresh("f")).collect();
            let body = Ir::apps(
                Ir::Var(fs[index].clone()),
                vs.iter().map(|v| Ir::Var(v.clone())),
            );
            let mut binders = vs;
            binders.extend(fs);
            Ir::lams(&binders, body)
        }
        Ir::Case(s, _, branches) => {
            let s = encode_ir(p, s);
            let arms: Vec<Ir> = branches
                .iter()
                .map(|(vs, b)| Ir::lams(vs, encode_ir(p, b)))
                .collect();
            Ir::apps(s, arms)
        }
        Ir::App(f, a) => Ir::app(encode_ir(p, f), encode_ir(p, a)),
        Ir::Lam(v, b) => Ir::Lam(v.clone(), Box::new(encode_ir(p, b))),
        Ir::Let(bs, body) => {
            let bs = bs
                .iter()
                .map(|(n, e)| (n.clone(), encode_ir(p, e)))
                .collect();
            Ir::Let(bs, Box::new(encode_ir(p, body)))
        }
        Ir::Var(_) | Ir::Prim(_) | Ir::Int(_) | Ir::Y => t.clone(),
    }
}

/// Orders every binding group by dependency and ties recursive knots with
/// `Y`. A self-recursive `f = e` becomes `f = Y (\f' . e[f := f'])`; a group of
/// mutually recursive functions becomes one Scott tuple under `Y`, from
/// which each member is projected. Afterwards every binding of a group
/// only refers to bindings before it.
///
/// The top-level bindings and the entry point are returned as one `Let`
/// whose body is the entry variable.
pub fn resolve_recursion(p: &SimpleProgram) -> Ir {
    let mut p = p.clone();
    let group = Ir::Let(p.bindings.clone(), Box::new(Ir::Var(p.entry.clone())));
    resolve_ir(&mut p, &group)
}

fn resolve_ir(p: &mut SimpleProgram, t: &Ir) -> Ir {
    match t {
        Ir::Let(bs, body) => {
            let bs: Vec<(String, Ir)> = bs
                .iter()
                .map(|(n, e)| (n.clone(), resolve_ir(p, e)))
                .collect();
            let body = resolve_ir(p, body);
            Ir::Let(order_group(p, bs), Box::new(body))
        }
        Ir::App(f, a) => Ir::app(resolve_ir(p, f), resolve_ir(p, a)),
        Ir::Lam(v, b) => Ir::Lam(v.clone(), Box::new(resolve_ir(p, b))),
        Ir::Case(s, d, branches) => Ir::Case(
            Box::new(resolve_ir(p, s)),
            d.clone(),
            branches
                .iter()
                .map(|(vs, b)| (vs.clone(), resolve_ir(p, b)))
                .collect(),
        ),
        _ => t.clone(),
    }
}

fn order_group(p: &mut SimpleProgram, bs: Vec<(String, Ir)>) -> Vec<(String, Ir)> {
    let index: HashMap<&str, usize> = bs
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), i))
        .collect();
    let refs: Vec<Vec<usize>> = bs
        .iter()
        .map(|(_, e)| {
            e.free_vars()
                .iter()
                .filter_map(|v| index.get(v.as_str()).copied())
                .collect()
        })
        .collect();
    let comps = deps::components(bs.len(), |i| refs[i].clone());
    let mut out = Vec::new();
    for comp in comps {
        match comp.members.as_slice() {
            [i] if !comp.recursive => out.push(bs[*i].clone()),
            [i] => {
                let (name, e) = &bs[*i];
                let inner = p.fresh(name);
                let e = e.replace(&HashMap::from([(name.clone(), Ir::Var(inner.clone()))]));
                out.push((name.clone(), Ir::app(Ir::Y, Ir::Lam(inner, Box::new(e)))));
            }
            members => {
                let k = members.len();
                let stem: Vec<&str> = members
                    .iter()
                    .map(|&i| bs[i].0.split('%').next().unwrap_or(""))
                    .collect();
                let grp = p.fresh(&stem.join("_"));
                let g = p.fresh("g");
                let mut map = HashMap::new();
                for (j, &i) in members.iter().enumerate() {
                    map.insert(bs[i].0.clone(), projection(p, Ir::Var(g.clone()), j, k));
                }
                let tuple = tuple_ctor(p, k);
                let fields = members.iter().map(|&i| bs[i].1.replace(&map));
                let packed = Ir::apps(tuple, fields);
                out.push((grp.clone(), Ir::app(Ir::Y, Ir::Lam(g, Box::new(packed)))));
                for (j, &i) in members.iter().enumerate() {
                    let proj = projection(p, Ir::Var(grp.clone()), j, k);
                    out.push((bs[i].0.clone(), proj));
                }
            }
        }
    }
    out
}

/// `\a1 .. ak f . f a1 .. ak`
fn tuple_ctor(p: &mut SimpleProgram, k: usize) -> Ir {
    let mut vs: Vec<String> = (0..k).map(|_| p.fresh("a")).collect();
    let f = p.fresh("f");
    let body = Ir::apps(Ir::Var(f.clone()), vs.iter().map(|v| Ir::Var(v.clone())));
    vs.push(f);
    Ir::lams(&vs, body)
}

/// `t (\a1 .. ak . aj)`
fn projection(p: &mut SimpleProgram, t: Ir, j: usize, k: usize) -> Ir {
    let vs: Vec<String> = (0..k).map(|_| p.fresh("a")).collect();
    let pick = Ir::Var(vs[j].clone());
    Ir::app(t, Ir::lams(&vs, pick))
}

/// Turns `let x = e in t` into `(\x . t) e`, binding by binding, and
/// converts the result to a core term. Fails if the result is not closed.
pub fn eliminate_let(t: &Ir) -> Result<CoreTerm, LowerError> {
    let core = to_core(t)?;
    match core.free_vars().into_iter().next() {
        Some(name) => Err(LowerError::UnboundName { name }),
        None => Ok(core),
    }
}

fn to_core(t: &Ir) -> Result<CoreTerm, LowerError> {
    Ok(match t {
        Ir::Var(v) => CoreTerm::Var(v.clone()),
        Ir::App(f, a) => CoreTerm::app(to_core(f)?, to_core(a)?),
        Ir::Lam(v, b) => CoreTerm::Lam(v.clone(), Box::new(to_core(b)?)),
        Ir::Let(bs, body) => {
            let mut acc = to_core(body)?;
            for (n, e) in bs.iter().rev() {
                acc = CoreTerm::app(CoreTerm::Lam(n.clone(), Box::new(acc)), to_core(e)?);
            }
            acc
        }
        Ir::Prim(id) => CoreTerm::Prim(*id),
        Ir::Int(n) => CoreTerm::Int(*n),
        Ir::Y => CoreTerm::Y,
        Ir::Case(..) | Ir::Ctor(_) => {
            return Err(LowerError::Internal(
                "case or constructor left after encoding".into(),
            ));
        }
    })
}
