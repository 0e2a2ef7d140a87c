//! Reference reducer for combinator terms.
//!
//! Terms are held as immutable shared trees. Every node caches whether its
//! subtree still holds a redex, so finding the next redex and rebuilding the
//! path above it costs time proportional to the depth, not the size.

use std::rc::Rc;

use super::{OracleError, ReduceResult, ReduceStatus};
use crate::kvy::{scott_bool, KvyTerm, Multipath};
use crate::prim::{op_name, PrimOp, PrimValue};

#[derive(Debug)]
enum Shape {
    Leaf(KvyTerm),
    App(Rc<Node>, Rc<Node>),
}

/// What a node's redex-ness depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Head {
    /// A combinator or primitive with this arity.
    Arity(u32),
    /// Integers and probes: never reduce.
    Inert,
}

#[derive(Debug)]
struct Node {
    shape: Shape,
    head: Head,
    /// Whether the spine head is a primitive operation.
    prim_head: bool,
    /// Arguments along the left spine.
    nargs: u32,
    /// Integer leaf.
    is_int: bool,
    /// Number of redexes (including erroneous primitive applications) in
    /// the subtree, saturating.
    redexes: u32,
    /// Some primitive in the subtree waits on an opaque argument.
    blocked: bool,
    /// This node is the root of a redex.
    here: Here,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Here {
    No,
    Redex,
    /// Saturated primitive whose normal arguments are not both integers.
    PrimError,
    /// Saturated primitive waiting on an opaque atom.
    Blocked,
}

type R = Rc<Node>;

fn leaf(t: KvyTerm) -> R {
    let (head, prim_head) = match &t {
        KvyTerm::K | KvyTerm::Y => (Head::Arity(2), false),
        KvyTerm::V(p) => (Head::Arity(p.arity() as u32), false),
        KvyTerm::Prim(id) => match PrimOp::from_id(*id) {
            Some(op) => (Head::Arity(op.arity()), true),
            None => (Head::Inert, false),
        },
        KvyTerm::Int(_) => (Head::Inert, false),
        KvyTerm::App(..) => unreachable!("leaves are atoms"),
    };
    let is_int = matches!(t, KvyTerm::Int(_));
    Rc::new(Node {
        shape: Shape::Leaf(t),
        head,
        prim_head,
        nargs: 0,
        is_int,
        redexes: 0,
        blocked: false,
        here: Here::No,
    })
}

/// Whether a normal term may still stand for an integer: it is headed by
/// an opaque atom (a probe) or is a primitive application blocked on one.
fn waiting(n: &Node) -> bool {
    (n.head == Head::Inert && !n.is_int) || n.here == Here::Blocked
}

fn app(l: R, r: R) -> R {
    let nargs = l.nargs + 1;
    let here = match l.head {
        Head::Arity(a) if a == nargs => {
            if l.prim_head {
                let Shape::App(_, first) = &l.shape else {
                    unreachable!("binary primitive has two arguments")
                };
                if first.is_int && r.is_int {
                    Here::Redex
                } else if first.redexes > 0 || r.redexes > 0 {
                    Here::No
                } else if [&**first, &*r].iter().any(|a| !a.is_int && !waiting(a)) {
                    Here::PrimError
                } else {
                    Here::Blocked
                }
            } else {
                Here::Redex
            }
        }
        _ => Here::No,
    };
    let own = u32::from(matches!(here, Here::Redex | Here::PrimError));
    let redexes = own.saturating_add(l.redexes).saturating_add(r.redexes);
    let blocked = here == Here::Blocked || l.blocked || r.blocked;
    let head = l.head;
    let prim_head = l.prim_head;
    Rc::new(Node {
        shape: Shape::App(l, r),
        head,
        prim_head,
        nargs,
        is_int: false,
        redexes,
        blocked,
        here,
    })
}

fn from_term(t: &KvyTerm) -> R {
    match t {
        KvyTerm::App(f, a) => app(from_term(f), from_term(a)),
        atom => leaf(atom.clone()),
    }
}

fn to_term(n: &Node) -> KvyTerm {
    match &n.shape {
        Shape::Leaf(t) => t.clone(),
        Shape::App(l, r) => KvyTerm::app(to_term(l), to_term(r)),
    }
}

fn spine_args(n: &R) -> (KvyTerm, Vec<R>) {
    let mut args = Vec::with_capacity(n.nargs as usize);
    let mut t = n;
    loop {
        match &t.shape {
            Shape::App(l, r) => {
                args.push(r.clone());
                t = l;
            }
            Shape::Leaf(h) => {
                args.reverse();
                return (h.clone(), args);
            }
        }
    }
}

fn spine(head: R, args: impl IntoIterator<Item = R>) -> R {
    args.into_iter().fold(head, app)
}

/// Rewrites the redex rooted at `n` by one rule.
fn contract(n: &R) -> Result<R, OracleError> {
    let (head, args) = spine_args(n);
    Ok(match head {
        KvyTerm::K => args[0].clone(),
        KvyTerm::Y => {
            let (f, x) = (args[0].clone(), args[1].clone());
            app(app(f.clone(), app(leaf(KvyTerm::Y), f)), x)
        }
        KvyTerm::V(p) => {
            let w = args.last().expect("V has at least one argument").clone();
            let rest = &args[..args.len() - 1];
            match p {
                Multipath::End => w,
                Multipath::Left(q) => {
                    let inner = spine(leaf(KvyTerm::V(*q)), rest[1..].iter().cloned().chain([w]));
                    app(inner, rest[0].clone())
                }
                Multipath::Right(q) => {
                    let inner = spine(leaf(KvyTerm::V(*q)), rest[1..].iter().cloned().chain([w]));
                    app(rest[0].clone(), inner)
                }
                Multipath::Fork(l, r) => {
                    let (xl, xr) = rest.split_at(l.degree());
                    let left = spine(leaf(KvyTerm::V(*l)), xl.iter().cloned().chain([w.clone()]));
                    let right = spine(leaf(KvyTerm::V(*r)), xr.iter().cloned().chain([w]));
                    app(left, right)
                }
            }
        }
        KvyTerm::Prim(id) => {
            let op = PrimOp::from_id(id).expect("reducible primitive");
            let int = |n: &R| match &n.shape {
                Shape::Leaf(KvyTerm::Int(v)) => Some(*v),
                _ => None,
            };
            let (Some(a), Some(b)) = (int(&args[0]), int(&args[1])) else {
                return Err(OracleError::PrimTypeError { op: op_name(id) });
            };
            match op.apply(a, b).map_err(|_| OracleError::DivisionByZero)? {
                PrimValue::Int(v) => leaf(KvyTerm::Int(v)),
                PrimValue::Bool(b) => from_term(scott_bool(b)),
            }
        }
        KvyTerm::Int(_) | KvyTerm::App(..) => unreachable!("not a redex head"),
    })
}

/// How the next redex is chosen.
pub enum Strategy<'a> {
    LeftmostOutermost,
    /// Called with the number of redexes; returns the preorder index of the
    /// one to contract.
    Choose(&'a mut dyn FnMut(usize) -> usize),
}

/// Finds the `k`-th redex in preorder and replaces it by its contractum.
fn step_at(n: &R, mut k: u32) -> Result<R, OracleError> {
    // Walk down, remembering the path, then rebuild upwards.
    let mut path: Vec<(R, bool)> = Vec::new();
    let mut cur = n.clone();
    loop {
        if matches!(cur.here, Here::Redex | Here::PrimError) {
            if k == 0 {
                break;
            }
            k -= 1;
        }
        let Shape::App(l, r) = &cur.shape else {
            unreachable!("redex count out of sync")
        };
        let (l, r) = (l.clone(), r.clone());
        if k < l.redexes {
            path.push((cur, true));
            cur = l;
        } else {
            k -= l.redexes;
            path.push((cur, false));
            cur = r;
        }
    }
    if cur.here == Here::PrimError {
        return Err(contract(&cur).expect_err("ill-typed primitive"));
    }
    let mut new = contract(&cur)?;
    while let Some((parent, went_left)) = path.pop() {
        let Shape::App(l, r) = &parent.shape else {
            unreachable!()
        };
        new = if went_left {
            app(new, r.clone())
        } else {
            app(l.clone(), new)
        };
    }
    Ok(new)
}

/// Performs the leftmost-outermost reduction step, if there is a redex.
pub fn step_kvy(t: &KvyTerm) -> Result<Option<KvyTerm>, OracleError> {
    let n = from_term(t);
    if n.redexes == 0 {
        return Ok(None);
    }
    let next = step_at(&n, 0)?;
    Ok(Some(to_term(&next)))
}

/// Reduces until no redex remains or `fuel` steps have been taken.
pub fn reduce_kvy(t: &KvyTerm, fuel: u64) -> Result<ReduceResult<KvyTerm>, OracleError> {
    reduce_kvy_with(t, fuel, Strategy::LeftmostOutermost)
}

pub fn reduce_kvy_with(
    t: &KvyTerm,
    fuel: u64,
    mut strategy: Strategy<'_>,
) -> Result<ReduceResult<KvyTerm>, OracleError> {
    let mut n = from_term(t);
    let mut steps = 0;
    while n.redexes > 0 {
        if steps >= fuel {
            return Ok(ReduceResult {
                term: to_term(&n),
                status: ReduceStatus::FuelExhausted,
                steps,
            });
        }
        let k = match &mut strategy {
            Strategy::LeftmostOutermost => 0,
            Strategy::Choose(choose) => {
                choose(n.redexes as usize).min(n.redexes as usize - 1) as u32
            }
        };
        n = step_at(&n, k)?;
        steps += 1;
    }
    let status = if n.blocked {
        ReduceStatus::Stuck
    } else {
        ReduceStatus::NormalForm
    };
    Ok(ReduceResult {
        term: to_term(&n),
        status,
        steps,
    })
}

/// The tree a saturated `V p x1 .. xn w` denotes, built in one go: the
/// arguments fill the siblings along the path in order and `w` sits at
/// every end of the path. Equal to iterating the single-step V rules.
pub fn v_composite(p: &Multipath, args: &[KvyTerm], w: &KvyTerm) -> KvyTerm {
    fn build<'a>(
        p: &Multipath,
        args: &mut impl Iterator<Item = &'a KvyTerm>,
        w: &KvyTerm,
    ) -> KvyTerm {
        match p {
            Multipath::End => w.clone(),
            Multipath::Left(q) => {
                let x = args.next().expect("argument per step").clone();
                KvyTerm::app(build(q, args, w), x)
            }
            Multipath::Right(q) => {
                let x = args.next().expect("argument per step").clone();
                KvyTerm::app(x, build(q, args, w))
            }
            Multipath::Fork(l, r) => {
                let l = build(l, args, w);
                KvyTerm::app(l, build(r, args, w))
            }
        }
    }
    assert_eq!(args.len(), p.degree(), "one argument per path step");
    build(p, &mut args.iter(), w)
}
