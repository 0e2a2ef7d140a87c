//! A lazy, environment-based interpreter for checked surface programs.
//!
//! It shares nothing with the lowering pipeline, so its results are an
//! independent reference for the compiled code.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use lambdam::prim::{PrimOp, PrimValue};
use lambdam::readback::ValueTree;
use lambdam::syntax::{group_let_bindings, FunDef, Pattern, Term, TermKind};
use lambdam::typecheck::{LiteralType, Type, TypedProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InterpError {
    FuelExhausted,
    DivisionByZero,
    NoMatch,
    Unbound(String),
    NotGround,
    Malformed(&'static str),
}

impl fmt::Display for InterpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterpError::FuelExhausted => write!(f, "fuel exhausted"),
            InterpError::DivisionByZero => write!(f, "division by zero"),
            InterpError::NoMatch => write!(f, "no pattern matched"),
            InterpError::Unbound(x) => write!(f, "unbound name `{x}`"),
            InterpError::NotGround => write!(f, "result type is not ground"),
            InterpError::Malformed(what) => write!(f, "ill-typed value: {what}"),
        }
    }
}

type R<T> = Result<T, InterpError>;

enum Expr {
    Var(String),
    App(Rc<Expr>, Rc<Expr>),
    Lam(String, Rc<Expr>),
    Let(Rc<Vec<Rc<Def>>>, Rc<Expr>),
    If(Rc<Expr>, Rc<Expr>, Rc<Expr>),
    Case(Rc<Expr>, Vec<(Pattern, Rc<Expr>)>),
    Ctor(String, usize),
    Prim(PrimOp),
    Nat(u64),
    Int(i64),
}

struct Def {
    name: String,
    arity: usize,
    clauses: Vec<(Vec<Pattern>, Rc<Expr>)>,
}

type Thunk = Rc<RefCell<State>>;

enum State {
    Delayed(Rc<Expr>, Env),
    Busy,
    Done(Val),
}

#[derive(Clone)]
enum Val {
    Ctor(String, Vec<Thunk>),
    Int(i64),
    Lam(String, Rc<Expr>, Env),
    Fun(Rc<Def>, Env, Vec<Thunk>),
    PartialCtor(String, usize, Vec<Thunk>),
    Prim(PrimOp, Vec<Thunk>),
}

type Env = Option<Rc<Frame>>;

struct Frame {
    name: String,
    value: Thunk,
    next: Env,
}

fn extend(env: &Env, name: &str, value: Thunk) -> Env {
    Some(Rc::new(Frame {
        name: name.to_string(),
        value,
        next: env.clone(),
    }))
}

fn lookup(env: &Env, name: &str) -> Option<Thunk> {
    let mut cur = env.as_ref();
    while let Some(f) = cur {
        if f.name == name {
            return Some(f.value.clone());
        }
        cur = f.next.as_ref();
    }
    None
}

fn done(v: Val) -> Thunk {
    Rc::new(RefCell::new(State::Done(v)))
}

pub struct Interpreter<'p> {
    program: &'p TypedProgram,
    globals: HashMap<String, Rc<Def>>,
    cafs: RefCell<HashMap<String, Thunk>>,
    nat: Option<(String, String)>,
    bools: (String, String),
    fuel: std::cell::Cell<u64>,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p TypedProgram, fuel: u64) -> Self {
        let mut it = Interpreter {
            program,
            globals: HashMap::new(),
            cafs: RefCell::new(HashMap::new()),
            nat: program.nat_ctors(),
            bools: ("False".into(), "True".into()),
            fuel: std::cell::Cell::new(fuel),
        };
        let globals = program
            .program
            .bindings
            .iter()
            .map(|d| (d.name.clone(), Rc::new(it.def(d))))
            .collect();
        it.globals = globals;
        it
    }

    fn def(&self, d: &FunDef) -> Def {
        Def {
            name: d.name.clone(),
            arity: d.clauses.first().map_or(0, |c| c.patterns.len()),
            clauses: d
                .clauses
                .iter()
                .map(|c| (c.patterns.clone(), Rc::new(self.expr(&c.body))))
                .collect(),
        }
    }

    fn expr(&self, t: &Term) -> Expr {
        match &t.kind {
            TermKind::Var(x) => Expr::Var(x.clone()),
            TermKind::App(f, a) => Expr::App(Rc::new(self.expr(f)), Rc::new(self.expr(a))),
            TermKind::Lam(x, b) => Expr::Lam(x.clone(), Rc::new(self.expr(b))),
            TermKind::Let(bs, body) => {
                let defs = group_let_bindings(bs)
                    .iter()
                    .map(|d| Rc::new(self.def(d)))
                    .collect();
                Expr::Let(Rc::new(defs), Rc::new(self.expr(body)))
            }
            TermKind::If(c, a, b) => Expr::If(
                Rc::new(self.expr(c)),
                Rc::new(self.expr(a)),
                Rc::new(self.expr(b)),
            ),
            TermKind::Case(s, bs) => Expr::Case(
                Rc::new(self.expr(s)),
                bs.iter()
                    .map(|b| (b.pattern.clone(), Rc::new(self.expr(&b.body))))
                    .collect(),
            ),
            TermKind::Ctor(c) => {
                let arity = self.program.ctors.get(c).map_or(0, |i| i.arity());
                Expr::Ctor(c.clone(), arity)
            }
            TermKind::Prim(p) => Expr::Prim(PrimOp::from_name(p).expect("checked primitive")),
            TermKind::Lit(n) => match self.program.literals.get(&t.span.key()) {
                Some(LiteralType::Int) => Expr::Int(*n as i64),
                _ => Expr::Nat(*n),
            },
        }
    }

    /// Evaluates the entry point and reads the result back at its type.
    pub fn run_main(&self) -> R<ValueTree> {
        let entry = &self.program.program.entry;
        let v = self.global(entry)?;
        let ty = self.program.entry_scheme().ty.clone();
        self.value(done(v), &ty)
    }

    fn tick(&self) -> R<()> {
        let f = self.fuel.get();
        if f == 0 {
            return Err(InterpError::FuelExhausted);
        }
        self.fuel.set(f - 1);
        Ok(())
    }

    fn global(&self, name: &str) -> R<Val> {
        let def = self
            .globals
            .get(name)
            .ok_or_else(|| InterpError::Unbound(name.to_string()))?;
        if def.arity > 0 {
            return Ok(Val::Fun(def.clone(), None, Vec::new()));
        }
        let caf = self
            .cafs
            .borrow_mut()
            .entry(name.to_string())
            .or_insert_with(|| {
                Rc::new(RefCell::new(State::Delayed(def.clauses[0].1.clone(), None)))
            })
            .clone();
        self.force(&caf)
    }

    fn force(&self, t: &Thunk) -> R<Val> {
        let st = std::mem::replace(&mut *t.borrow_mut(), State::Busy);
        match st {
            State::Done(v) => {
                *t.borrow_mut() = State::Done(v.clone());
                Ok(v)
            }
            State::Busy => Err(InterpError::Malformed("value depends on itself")),
            State::Delayed(e, env) => match self.eval(&e, &env) {
                Ok(v) => {
                    *t.borrow_mut() = State::Done(v.clone());
                    Ok(v)
                }
                Err(err) => {
                    *t.borrow_mut() = State::Delayed(e, env);
                    Err(err)
                }
            },
        }
    }

    fn eval(&self, e: &Rc<Expr>, env: &Env) -> R<Val> {
        self.tick()?;
        match &**e {
            Expr::Var(x) => match lookup(env, x) {
                Some(t) => self.force(&t),
                None => self.global(x),
            },
            Expr::App(f, a) => {
                let fv = self.eval(f, env)?;
                let arg = Rc::new(RefCell::new(State::Delayed(a.clone(), env.clone())));
                self.apply(fv, arg)
            }
            Expr::Lam(x, b) => Ok(Val::Lam(x.clone(), b.clone(), env.clone())),
            Expr::Let(defs, body) => {
                let cells: Vec<Thunk> = defs.iter().map(|_| done(Val::Int(0))).collect();
                let mut inner = env.clone();
                for (d, c) in defs.iter().zip(&cells) {
                    inner = extend(&inner, &d.name, c.clone());
                }
                for (d, c) in defs.iter().zip(&cells) {
                    *c.borrow_mut() = if d.arity == 0 {
                        State::Delayed(d.clauses[0].1.clone(), inner.clone())
                    } else {
                        State::Done(Val::Fun(d.clone(), inner.clone(), Vec::new()))
                    };
                }
                self.eval(body, &inner)
            }
            Expr::If(c, a, b) => match self.eval(c, env)? {
                Val::Ctor(n, _) if n == self.bools.1 => self.eval(a, env),
                Val::Ctor(n, _) if n == self.bools.0 => self.eval(b, env),
                _ => Err(InterpError::Malformed("condition is not a Bool")),
            },
            Expr::Case(s, branches) => {
                let scrut = Rc::new(RefCell::new(State::Delayed(s.clone(), env.clone())));
                for (p, body) in branches {
                    let mut binds = Vec::new();
                    if self.matches(p, &scrut, &mut binds)? {
                        let mut inner = env.clone();
                        for (x, t) in binds {
                            inner = extend(&inner, &x, t);
                        }
                        return self.eval(body, &inner);
                    }
                }
                Err(InterpError::NoMatch)
            }
            Expr::Ctor(c, 0) => Ok(Val::Ctor(c.clone(), Vec::new())),
            Expr::Ctor(c, n) => Ok(Val::PartialCtor(c.clone(), *n, Vec::new())),
            Expr::Prim(op) => Ok(Val::Prim(*op, Vec::new())),
            Expr::Int(n) => Ok(Val::Int(*n)),
            Expr::Nat(n) => {
                let (s, z) = self
                    .nat
                    .as_ref()
                    .ok_or(InterpError::Malformed("numeral without Nat"))?;
                let mut v = Val::Ctor(z.clone(), Vec::new());
                for _ in 0..*n {
                    v = Val::Ctor(s.clone(), vec![done(v)]);
                }
                Ok(v)
            }
        }
    }

    fn apply(&self, f: Val, arg: Thunk) -> R<Val> {
        match f {
            Val::Lam(x, body, env) => self.eval(&body, &extend(&env, &x, arg)),
            Val::Fun(def, env, mut args) => {
                args.push(arg);
                if args.len() < def.arity {
                    return Ok(Val::Fun(def, env, args));
                }
                for (pats, body) in &def.clauses {
                    let mut binds = Vec::new();
                    let mut ok = true;
                    for (p, a) in pats.iter().zip(&args) {
                        if !self.matches(p, a, &mut binds)? {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        let mut inner = env.clone();
                        for (x, t) in binds {
                            inner = extend(&inner, &x, t);
                        }
                        return self.eval(body, &inner);
                    }
                }
                Err(InterpError::NoMatch)
            }
            Val::PartialCtor(c, n, mut args) => {
                args.push(arg);
                Ok(if args.len() == n {
                    Val::Ctor(c, args)
                } else {
                    Val::PartialCtor(c, n, args)
                })
            }
            Val::Prim(op, mut args) => {
                args.push(arg);
                if args.len() < 2 {
                    return Ok(Val::Prim(op, args));
                }
                let x = self.int(&args[0])?;
                let y = self.int(&args[1])?;
                match op.apply(x, y).map_err(|_| InterpError::DivisionByZero)? {
                    PrimValue::Int(n) => Ok(Val::Int(n)),
                    PrimValue::Bool(b) => {
                        let name = if b { &self.bools.1 } else { &self.bools.0 };
                        Ok(Val::Ctor(name.clone(), Vec::new()))
                    }
                }
            }
            Val::Ctor(..) | Val::Int(_) => Err(InterpError::Malformed("applied a non-function")),
        }
    }

    fn int(&self, t: &Thunk) -> R<i64> {
        match self.force(t)? {
            Val::Int(n) => Ok(n),
            _ => Err(InterpError::Malformed("primitive operand is not an Int")),
        }
    }

    fn matches(&self, p: &Pattern, t: &Thunk, binds: &mut Vec<(String, Thunk)>) -> R<bool> {
        match p {
            Pattern::Var(x, _) => {
                binds.push((x.clone(), t.clone()));
                Ok(true)
            }
            Pattern::Wildcard(_) => Ok(true),
            Pattern::Ctor(c, ps, _) => match self.force(t)? {
                Val::Ctor(name, fields) if &name == c => {
                    for (p, f) in ps.iter().zip(&fields) {
                        if !self.matches(p, f, binds)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                Val::Ctor(..) => Ok(false),
                _ => Err(InterpError::Malformed("matched a non-constructor")),
            },
        }
    }

    fn value(&self, t: Thunk, ty: &Type) -> R<ValueTree> {
        match ty {
            Type::Arrow(..) => Ok(ValueTree::Function),
            Type::Var(_) => Err(InterpError::NotGround),
            Type::Con(name, _) if name == "Int" => Ok(ValueTree::Int(self.int(&t)?)),
            Type::Con(name, args) => {
                if name == "Nat" {
                    if let Some((s, _)) = &self.nat {
                        let mut n = 0;
                        let mut cur = t;
                        loop {
                            match self.force(&cur)? {
                                Val::Ctor(c, fields) if &c == s => {
                                    n += 1;
                                    cur = fields[0].clone();
                                }
                                Val::Ctor(..) => return Ok(ValueTree::Nat(n)),
                                _ => return Err(InterpError::Malformed("Nat")),
                            }
                        }
                    }
                }
                let Val::Ctor(c, fields) = self.force(&t)? else {
                    return Err(InterpError::Malformed("data value"));
                };
                let info = &self.program.ctors[&c];
                let map: HashMap<_, _> = info.params.iter().copied().zip(args.clone()).collect();
                let mut out = Vec::new();
                for (f, fty) in fields.into_iter().zip(&info.fields) {
                    out.push(self.value(f, &fty.rename(&map))?);
                }
                Ok(ValueTree::Ctor(c, out))
            }
        }
    }
}

/// Runs `main` of a checked program. Deep evaluations recurse, so the work
/// happens on a thread with a generous stack.
pub fn interpret(program: &TypedProgram, fuel: u64) -> Result<ValueTree, InterpError> {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(256 << 20)
            .spawn_scoped(s, || Interpreter::new(program, fuel).run_main())
            .expect("spawn interpreter thread")
            .join()
            .expect("interpreter thread")
    })
}
