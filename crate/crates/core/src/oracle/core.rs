//! Reference reducer for lambda terms: normal-order beta reduction with the
//! same `Y` and primitive rules as the combinator reducer.
//!
//! Reduction works on a nameless representation, so substitution never
//! needs renaming; names are restored from the binders' original names
//! when the result is converted back.

use std::cell::Cell;
use std::rc::Rc;

use super::{OracleError, ReduceResult, ReduceStatus};
use crate::lower::{fresh_name, scott_ctor, CoreTerm};
use crate::prim::{op_name, PrimOp, PrimValue};

#[derive(Debug, PartialEq, Eq)]
enum T {
    /// Bound variable by de Bruijn index.
    Bound(u32),
    Free(Rc<str>),
    Lam(Rc<str>, R),
    App(R, R),
    Y,
    Prim(u32),
    Int(i64),
}

type R = Rc<T>;

fn from_core(t: &CoreTerm, env: &mut Vec<String>) -> R {
    Rc::new(match t {
        CoreTerm::Var(v) => match env.iter().rev().position(|b| b == v) {
            Some(i) => T::Bound(i as u32),
            None => T::Free(v.as_str().into()),
        },
        CoreTerm::App(f, a) => T::App(from_core(f, env), from_core(a, env)),
        CoreTerm::Lam(v, b) => {
            env.push(v.clone());
            let body = from_core(b, env);
            env.pop();
            T::Lam(v.as_str().into(), body)
        }
        CoreTerm::Y => T::Y,
        CoreTerm::Prim(id) => T::Prim(*id),
        CoreTerm::Int(n) => T::Int(*n),
    })
}

fn to_core(t: &T, env: &mut Vec<String>, free: &[String]) -> CoreTerm {
    match t {
        T::Bound(i) => CoreTerm::Var(env[env.len() - 1 - *i as usize].clone()),
        T::Free(v) => CoreTerm::Var(v.to_string()),
        T::App(f, a) => CoreTerm::app(to_core(f, env, free), to_core(a, env, free)),
        T::Lam(hint, b) => {
            let taken = |n: &str| env.iter().any(|e| e == n) || free.iter().any(|f| f == n);
            let name = if taken(hint) {
                fresh_name(hint, taken)
            } else {
                hint.to_string()
            };
            env.push(name.clone());
            let body = to_core(b, env, free);
            env.pop();
            CoreTerm::Lam(name, Box::new(body))
        }
        T::Y => CoreTerm::Y,
        T::Prim(id) => CoreTerm::Prim(*id),
        T::Int(n) => CoreTerm::Int(*n),
    }
}

/// Why a step did not complete.
enum Halt {
    Error(OracleError),
    /// The work budget ran out.
    Exhausted,
}

impl From<OracleError> for Halt {
    fn from(e: OracleError) -> Self {
        Halt::Error(e)
    }
}

/// Node visits left. Terms may double in size at every step, and a step
/// walks the term, so counting steps alone does not bound the running time.
struct Work(Cell<u64>);

impl Work {
    fn tick(&self) -> Result<(), Halt> {
        match self.0.get() {
            0 => Err(Halt::Exhausted),
            n => {
                self.0.set(n - 1);
                Ok(())
            }
        }
    }
}

/// Node visits allowed per unit of fuel.
const WORK_PER_STEP: u64 = 1024;

/// Adds `by` to every index at or above `cutoff`.
fn shift(t: &R, by: u32, cutoff: u32, w: &Work) -> Result<R, Halt> {
    w.tick()?;
    Ok(match &**t {
        T::Bound(i) if *i >= cutoff => Rc::new(T::Bound(i + by)),
        T::Lam(h, b) => Rc::new(T::Lam(h.clone(), shift(b, by, cutoff + 1, w)?)),
        T::App(f, a) => Rc::new(T::App(shift(f, by, cutoff, w)?, shift(a, by, cutoff, w)?)),
        _ => t.clone(),
    })
}

fn has_loose(t: &T, depth: u32, w: &Work) -> Result<bool, Halt> {
    w.tick()?;
    Ok(match t {
        T::Bound(i) => *i >= depth,
        T::Lam(_, b) => has_loose(b, depth + 1, w)?,
        T::App(f, a) => has_loose(f, depth, w)? || has_loose(a, depth, w)?,
        _ => false,
    })
}

/// `body` with index `depth` replaced by `arg` and higher indices lowered.
fn instantiate(body: &R, arg: &R, depth: u32, arg_closed: bool, w: &Work) -> Result<R, Halt> {
    w.tick()?;
    Ok(match &**body {
        T::Bound(i) if *i == depth => {
            if arg_closed || depth == 0 {
                arg.clone()
            } else {
                shift(arg, depth, 0, w)?
            }
        }
        T::Bound(i) if *i > depth => Rc::new(T::Bound(i - 1)),
        T::Lam(h, b) => Rc::new(T::Lam(
            h.clone(),
            instantiate(b, arg, depth + 1, arg_closed, w)?,
        )),
        T::App(f, a) => Rc::new(T::App(
            instantiate(f, arg, depth, arg_closed, w)?,
            instantiate(a, arg, depth, arg_closed, w)?,
        )),
        _ => body.clone(),
    })
}

fn spine(t: &R) -> (&R, Vec<&R>) {
    let mut args = Vec::new();
    let mut h = t;
    while let T::App(f, a) = &**h {
        args.push(a);
        h = f;
    }
    args.reverse();
    (h, args)
}

enum Found {
    Done(R),
    /// No redex; whether some primitive is blocked on an opaque argument.
    Normal {
        blocked: bool,
    },
}

fn int(t: &T) -> Option<i64> {
    if let T::Int(n) = t {
        Some(*n)
    } else {
        None
    }
}

/// One leftmost-outermost step.
fn step(t: &R, w: &Work) -> Result<Found, Halt> {
    w.tick()?;
    match &**t {
        T::Lam(h, b) => Ok(match step(b, w)? {
            Found::Done(b) => Found::Done(Rc::new(T::Lam(h.clone(), b))),
            n => n,
        }),
        T::App(..) => {
            // Walk the spine once: the outermost redex, if any, is the
            // application that saturates the head; otherwise look inside
            // the arguments from left to right.
            let mut apps = Vec::new();
            let mut head = t;
            while let T::App(f, _) = &**head {
                w.tick()?;
                apps.push(head);
                head = f;
            }
            apps.reverse();
            let parts = |i: usize| match &**apps[i] {
                T::App(f, a) => (f, a),
                _ => unreachable!("spine node"),
            };
            let rebuild = |mut n: R, from: usize| {
                for &app in &apps[from..] {
                    let T::App(_, a) = &**app else {
                        unreachable!("spine node")
                    };
                    n = Rc::new(T::App(n, a.clone()));
                }
                n
            };
            let arity = match &**head {
                T::Lam(..) => 1,
                T::Y => 2,
                T::Prim(id) if PrimOp::from_id(*id).is_some() => 2,
                _ => usize::MAX,
            };
            let mut blocked = false;
            let mut first = 0;
            if apps.len() >= arity {
                let at = arity - 1;
                let found = match &**head {
                    T::Lam(_, body) => {
                        let a = parts(0).1;
                        let closed = !has_loose(a, 0, w)?;
                        Found::Done(instantiate(body, a, 0, closed, w)?)
                    }
                    T::Y => {
                        let (f, x) = (parts(0).1, parts(1).1);
                        let y = Rc::new(T::App(Rc::new(T::Y), f.clone()));
                        let inner = Rc::new(T::App(f.clone(), y));
                        Found::Done(Rc::new(T::App(inner, x.clone())))
                    }
                    T::Prim(id) => {
                        let op = PrimOp::from_id(*id).expect("operation");
                        let (x, y) = (parts(0).1, parts(1).1);
                        match (int(x), int(y)) {
                            (Some(x), Some(y)) => Found::Done(
                                match op.apply(x, y).map_err(|_| OracleError::DivisionByZero)? {
                                    PrimValue::Int(v) => Rc::new(T::Int(v)),
                                    PrimValue::Bool(b) => from_core(
                                        &scott_ctor(usize::from(b), 2, 0),
                                        &mut Vec::new(),
                                    ),
                                },
                            ),
                            _ => prim_args(apps[1], *id, &[x, y], w)?,
                        }
                    }
                    _ => unreachable!("head with an arity"),
                };
                match found {
                    Found::Done(n) => return Ok(Found::Done(rebuild(n, at + 1))),
                    Found::Normal { blocked: b } => {
                        blocked = b;
                        first = at + 1;
                    }
                }
            }
            for i in first..apps.len() {
                let (f, a) = parts(i);
                match step(a, w)? {
                    Found::Done(a) => {
                        return Ok(Found::Done(rebuild(Rc::new(T::App(f.clone(), a)), i + 1)))
                    }
                    Found::Normal { blocked: b } => blocked |= b,
                }
            }
            Ok(Found::Normal { blocked })
        }
        _ => Ok(Found::Normal { blocked: false }),
    }
}

/// A saturated primitive whose arguments are not both integers: reduce
/// inside the arguments, or report the application as stuck or ill-typed.
fn prim_args(t: &R, id: u32, args: &[&R], w: &Work) -> Result<Found, Halt> {
    let T::App(f, a) = &**t else { unreachable!() };
    if let Found::Done(f) = step(f, w)? {
        return Ok(Found::Done(Rc::new(T::App(f, a.clone()))));
    }
    if let Found::Done(a) = step(a, w)? {
        return Ok(Found::Done(Rc::new(T::App(f.clone(), a))));
    }
    // Opaque atoms, and primitive applications blocked on them, may still
    // stand for integers.
    let opaque = |x: &R| {
        let (h, xs) = spine(x);
        match &**h {
            T::Free(_) => true,
            T::Prim(p) => PrimOp::from_id(*p).is_none() || xs.len() == 2,
            _ => false,
        }
    };
    if args.iter().all(|x| int(x).is_some() || opaque(x)) {
        Ok(Found::Normal { blocked: true })
    } else {
        Err(OracleError::PrimTypeError { op: op_name(id) }.into())
    }
}

/// Performs the leftmost-outermost step, if there is a redex.
pub fn step_core(t: &CoreTerm) -> Result<Option<CoreTerm>, OracleError> {
    let r = from_core(t, &mut Vec::new());
    match step(&r, &Work(Cell::new(u64::MAX))) {
        Ok(Found::Done(n)) => Ok(Some(back(&n, t))),
        Ok(Found::Normal { .. }) => Ok(None),
        Err(Halt::Error(e)) => Err(e),
        Err(Halt::Exhausted) => unreachable!("unbounded work"),
    }
}

fn back(n: &T, original: &CoreTerm) -> CoreTerm {
    to_core(n, &mut Vec::new(), &original.free_vars())
}

/// Whether the tree `t` unfolds to has at most `limit` nodes.
fn fits(t: &T, limit: &mut u64) -> bool {
    if *limit == 0 {
        return false;
    }
    *limit -= 1;
    match t {
        T::Lam(_, b) => fits(b, limit),
        T::App(f, a) => fits(f, limit) && fits(a, limit),
        _ => true,
    }
}

/// Largest term handed back when reduction runs out of fuel.
const EXHAUSTED_TERM_LIMIT: u64 = 1 << 16;

/// Normal-order reduction to normal form within `fuel` steps.
///
/// Besides the steps, the work spent walking and rebuilding terms is
/// bounded by `fuel` times a constant; running out of either gives
/// `FuelExhausted`. The term of a `FuelExhausted` result is the term
/// reached, or the input when the term reached has grown too large.
pub fn reduce_core(t: &CoreTerm, fuel: u64) -> Result<ReduceResult<CoreTerm>, OracleError> {
    let work = Work(Cell::new(
        fuel.saturating_mul(WORK_PER_STEP).max(WORK_PER_STEP),
    ));
    let mut r = from_core(t, &mut Vec::new());
    let mut steps = 0;
    loop {
        match step(&r, &work) {
            Ok(Found::Done(_)) if steps >= fuel => return Ok(exhausted(&r, t, steps)),
            Ok(Found::Done(n)) => {
                r = n;
                steps += 1;
            }
            Ok(Found::Normal { blocked }) => {
                let status = if blocked {
                    ReduceStatus::Stuck
                } else {
                    ReduceStatus::NormalForm
                };
                return Ok(ReduceResult {
                    term: back(&r, t),
                    status,
                    steps,
                });
            }
            Err(Halt::Error(e)) => return Err(e),
            Err(Halt::Exhausted) => return Ok(exhausted(&r, t, steps)),
        }
    }
}

fn exhausted(r: &T, input: &CoreTerm, steps: u64) -> ReduceResult<CoreTerm> {
    let mut limit = EXHAUSTED_TERM_LIMIT;
    let term = if fits(r, &mut limit) {
        back(r, input)
    } else {
        input.clone()
    };
    ReduceResult {
        term,
        status: ReduceStatus::FuelExhausted,
        steps,
    }
}

/// Equality up to the names of bound variables.
pub fn alpha_eq(a: &CoreTerm, b: &CoreTerm) -> bool {
    from_core(a, &mut Vec::new()) == from_core(b, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> CoreTerm {
        CoreTerm::var(s)
    }

    #[test]
    fn identity() {
        let t = CoreTerm::app(CoreTerm::lam("x", v("x")), v("a"));
        let r = reduce_core(&t, 10).unwrap();
        assert_eq!(
            (r.term, r.status, r.steps),
            (v("a"), ReduceStatus::NormalForm, 1)
        );
    }

    #[test]
    fn capture_is_avoided() {
        // (\x y . x) y  ==>  \y' . y
        let t = CoreTerm::app(CoreTerm::lams(&["x", "y"], v("x")), v("y"));
        let r = reduce_core(&t, 10).unwrap().term;
        assert_eq!(r.to_string(), "\\y'1 . y");
    }

    #[test]
    fn y_needs_two_arguments() {
        let t = CoreTerm::app(CoreTerm::Y, v("f"));
        assert_eq!(reduce_core(&t, 10).unwrap().steps, 0);
        let t = CoreTerm::apps(CoreTerm::Y, [CoreTerm::lams(&["r", "x"], v("x")), v("a")]);
        assert_eq!(reduce_core(&t, 10).unwrap().term, v("a"));
    }

    #[test]
    fn primitives_and_comparisons() {
        let t = CoreTerm::apps(
            CoreTerm::Prim(PrimOp::Mul.id()),
            [CoreTerm::Int(6), CoreTerm::Int(7)],
        );
        assert_eq!(reduce_core(&t, 10).unwrap().term, CoreTerm::Int(42));
        let t = CoreTerm::apps(
            CoreTerm::Prim(PrimOp::Eq.id()),
            [CoreTerm::Int(1), CoreTerm::Int(2)],
        );
        assert!(alpha_eq(
            &reduce_core(&t, 10).unwrap().term,
            &scott_ctor(0, 2, 0)
        ));
        let bad = CoreTerm::apps(
            CoreTerm::Prim(PrimOp::Add.id()),
            [CoreTerm::lam("x", v("x")), CoreTerm::Int(2)],
        );
        assert!(matches!(
            reduce_core(&bad, 10),
            Err(OracleError::PrimTypeError { .. })
        ));
    }

    #[test]
    fn reduces_under_lambdas() {
        let t = CoreTerm::lam("z", CoreTerm::app(CoreTerm::lam("x", v("x")), v("z")));
        assert_eq!(
            reduce_core(&t, 10).unwrap().term,
            CoreTerm::lam("z", v("z"))
        );
    }
}
