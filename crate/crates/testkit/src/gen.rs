//! Random well-typed programs.
//!
//! Programs are built from a small library over monomorphic data types.
//! Every generated function is annotated and only calls functions defined
//! before it, so all programs terminate. Numeric literals always appear
//! where their type is fixed by the context.

use rand::seq::SliceRandom;
use rand::Rng;

/// Library definitions shared by all generated programs.
pub const LIBRARY: &str = "\
data NList = NNil | NCons Nat NList
data MaybeN = NoN | JustN Nat
data Pair = MkPair Nat Bool

plus : Nat -> Nat -> Nat
plus Z n = n
plus (S m) n = S (plus m n)

pred : Nat -> Nat
pred Z = Z
pred (S n) = n

not : Bool -> Bool
not True = False
not False = True

even : Nat -> Bool
even Z = True
even (S n) = odd n

odd : Nat -> Bool
odd Z = False
odd (S n) = even n

len : NList -> Nat
len NNil = Z
len (NCons _ t) = S (len t)

mapN : (Nat -> Nat) -> NList -> NList
mapN f NNil = NNil
mapN f (NCons h t) = NCons (f h) (mapN f t)

foldN : (Nat -> Nat -> Nat) -> Nat -> NList -> Nat
foldN f z NNil = z
foldN f z (NCons h t) = f h (foldN f z t)

fromMaybeN : Nat -> MaybeN -> Nat
fromMaybeN d NoN = d
fromMaybeN _ (JustN x) = x
";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenType {
    Nat,
    Bool,
    Int,
    List,
    Maybe,
    Pair,
}

impl GenType {
    pub const ALL: [GenType; 6] = [
        GenType::Nat,
        GenType::Bool,
        GenType::Int,
        GenType::List,
        GenType::Maybe,
        GenType::Pair,
    ];
    const DATA: [GenType; 5] = [
        GenType::Nat,
        GenType::Bool,
        GenType::List,
        GenType::Maybe,
        GenType::Pair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenType::Nat => "Nat",
            GenType::Bool => "Bool",
            GenType::Int => "Int",
            GenType::List => "NList",
            GenType::Maybe => "MaybeN",
            GenType::Pair => "Pair",
        }
    }
}

struct Func {
    name: String,
    params: Vec<GenType>,
    result: GenType,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    vars: Vec<(String, GenType)>,
    funcs: Vec<Func>,
    fresh: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("x{}", self.fresh)
    }

    fn with_vars<T>(&mut self, vars: &[(String, GenType)], f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.vars.len();
        self.vars.extend_from_slice(vars);
        let out = f(self);
        self.vars.truncate(n);
        out
    }

    fn nat_lit(&mut self) -> String {
        self.rng.gen_range(0..4u32).to_string()
    }

    fn leaf(&mut self, ty: GenType) -> String {
        let candidates: Vec<String> = self
            .vars
            .iter()
            .filter(|(_, t)| *t == ty)
            .map(|(x, _)| x.clone())
            .collect();
        if !candidates.is_empty() && self.rng.gen_bool(0.6) {
            return candidates.choose(self.rng).expect("non-empty").clone();
        }
        match ty {
            GenType::Nat => self.nat_lit(),
            GenType::Bool => ["True", "False"].choose(self.rng).expect("two").to_string(),
            GenType::Int => self.rng.gen_range(0..10u32).to_string(),
            GenType::List => match self.rng.gen_range(0..3) {
                0 => "NNil".into(),
                _ => {
                    let (a, b) = (self.nat_lit(), self.nat_lit());
                    format!("(NCons {a} (NCons {b} NNil))")
                }
            },
            GenType::Maybe => match self.rng.gen_bool(0.3) {
                true => "NoN".into(),
                false => format!("(JustN {})", self.nat_lit()),
            },
            GenType::Pair => {
                let (n, b) = (self.nat_lit(), self.leaf(GenType::Bool));
                format!("(MkPair {n} {b})")
            }
        }
    }

    /// An expression whose type is fixed even when it is a bare literal.
    fn pinned(&mut self, ty: GenType, depth: u32) -> String {
        let e = self.expr(ty, depth);
        if e.chars().all(|c| c.is_ascii_digit()) {
            match ty {
                GenType::Int => format!("(#add 0 {e})"),
                _ => format!("(plus 0 {e})"),
            }
        } else {
            e
        }
    }

    fn expr(&mut self, ty: GenType, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf(ty);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..10) {
            0 => {
                let c = self.expr(GenType::Bool, d);
                let (a, b) = (self.expr(ty, d), self.expr(ty, d));
                format!("(if {c} then {a} else {b})")
            }
            1 => {
                let t2 = *GenType::ALL.choose(self.rng).expect("types");
                let x = self.var();
                let rhs = self.expr(t2, d);
                let body = self.with_vars(&[(x.clone(), t2)], |g| g.expr(ty, d));
                format!("(let {{ {x} : {} ; {x} = {rhs} }} in {body})", t2.name())
            }
            2 => self.case(ty, d),
            3 => {
                let t2 = *GenType::ALL.choose(self.rng).expect("types");
                let x = self.var();
                let arg = self.pinned(t2, d);
                let body = self.with_vars(&[(x.clone(), t2)], |g| g.expr(ty, d));
                format!("((\\{x} . {body}) {arg})")
            }
            4 | 5 => self.call(ty, d).unwrap_or_else(|| self.specific(ty, d)),
            _ => self.specific(ty, d),
        }
    }

    fn call(&mut self, ty: GenType, d: u32) -> Option<String> {
        let fits: Vec<usize> = (0..self.funcs.len())
            .filter(|i| self.funcs[*i].result == ty)
            .collect();
        let i = *fits.choose(self.rng)?;
        let (name, params) = (self.funcs[i].name.clone(), self.funcs[i].params.clone());
        let args: Vec<String> = params.into_iter().map(|p| self.expr(p, d)).collect();
        Some(format!("({name} {})", args.join(" ")))
    }

    fn specific(&mut self, ty: GenType, d: u32) -> String {
        use GenType::*;
        let pick = self.rng.gen_range(0..4);
        match ty {
            Nat => match pick {
                0 => format!("(S {})", self.expr(Nat, d)),
                1 => format!("(plus {} {})", self.expr(Nat, d), self.expr(Nat, d)),
                2 => match self.rng.gen_bool(0.5) {
                    true => format!("(len {})", self.expr(List, d)),
                    false => format!("(pred {})", self.expr(Nat, d)),
                },
                _ => match self.rng.gen_bool(0.5) {
                    true => {
                        let (a, b) = (self.var(), self.var());
                        let vars = [(a.clone(), Nat), (b.clone(), Nat)];
                        let f = self.with_vars(&vars, |g| g.expr(Nat, d.min(1)));
                        let (z, l) = (self.expr(Nat, d), self.expr(List, d));
                        format!("(foldN (\\{a} {b} . {f}) {z} {l})")
                    }
                    false => format!("(fromMaybeN {} {})", self.expr(Nat, d), self.expr(Maybe, d)),
                },
            },
            Bool => match pick {
                0 => format!("(not {})", self.expr(Bool, d)),
                1 => {
                    let f = ["even", "odd"].choose(self.rng).expect("two");
                    format!("({f} {})", self.expr(Nat, d))
                }
                _ => {
                    let op = ["eq", "lt", "le"].choose(self.rng).expect("three");
                    format!("(#{op} {} {})", self.expr(Int, d), self.expr(Int, d))
                }
            },
            Int => {
                let op = ["add", "sub", "mul", "div", "rem"]
                    .choose(self.rng)
                    .expect("five");
                let a = self.expr(Int, d);
                let b = match *op {
                    "div" | "rem" => self.rng.gen_range(1..6u32).to_string(),
                    _ => self.expr(Int, d),
                };
                format!("(#{op} {a} {b})")
            }
            List => match pick {
                0 | 1 => format!("(NCons {} {})", self.expr(Nat, d), self.expr(List, d)),
                _ => {
                    let x = self.var();
                    let f = self.with_vars(&[(x.clone(), Nat)], |g| g.expr(Nat, d.min(1)));
                    format!("(mapN (\\{x} . {f}) {})", self.expr(List, d))
                }
            },
            Maybe => format!("(JustN {})", self.expr(Nat, d)),
            Pair => format!("(MkPair {} {})", self.expr(Nat, d), self.expr(Bool, d)),
        }
    }

    fn case(&mut self, ty: GenType, d: u32) -> String {
        let st = *GenType::DATA.choose(self.rng).expect("types");
        let scrut = self.expr(st, d);
        let arms: Vec<(String, Vec<(String, GenType)>)> = self.arms(st);
        let arms: Vec<String> = arms
            .into_iter()
            .map(|(pat, vars)| {
                let body = self.with_vars(&vars, |g| g.expr(ty, d));
                format!("{pat} => {body}")
            })
            .collect();
        format!("(case {scrut} of {{ {} }})", arms.join(" ; "))
    }

    /// Exhaustive pattern sets for a data type, with the variables they bind.
    fn arms(&mut self, st: GenType) -> Vec<(String, Vec<(String, GenType)>)> {
        use GenType::*;
        let deep = self.rng.gen_bool(0.3);
        let (a, b) = (self.var(), self.var());
        match st {
            Nat if deep => vec![(format!("S (S {a})"), vec![(a, Nat)]), ("_".into(), vec![])],
            Nat => vec![("Z".into(), vec![]), (format!("S {a}"), vec![(a, Nat)])],
            Bool => vec![("True".into(), vec![]), ("False".into(), vec![])],
            List if deep => vec![
                (
                    format!("NCons {a} (NCons _ {b})"),
                    vec![(a, Nat), (b, List)],
                ),
                ("_".into(), vec![]),
            ],
            List => vec![
                ("NNil".into(), vec![]),
                (format!("NCons {a} {b}"), vec![(a, Nat), (b, List)]),
            ],
            Maybe => vec![
                ("NoN".into(), vec![]),
                (format!("JustN {a}"), vec![(a, Nat)]),
            ],
            Pair => vec![(format!("MkPair {a} {b}"), vec![(a, Nat), (b, Bool)])],
            Int => unreachable!("no patterns on Int"),
        }
    }

    fn function(&mut self, index: usize, depth: u32) -> String {
        let name = format!("f{index}");
        let nparams = self.rng.gen_range(1..=2);
        let params: Vec<GenType> = (0..nparams)
            .map(|_| *GenType::ALL.choose(self.rng).expect("types"))
            .collect();
        let result = *GenType::ALL.choose(self.rng).expect("types");
        let sig = params
            .iter()
            .map(|p| p.name())
            .chain([result.name()])
            .collect::<Vec<_>>()
            .join(" -> ");
        let mut out = format!("{name} : {sig}\n");
        let rest: Vec<(String, GenType)> = params[1..].iter().map(|t| (self.var(), *t)).collect();
        let rest_names: Vec<&str> = rest.iter().map(|(x, _)| x.as_str()).collect();
        if params[0] != GenType::Int && self.rng.gen_bool(0.6) {
            // One clause per constructor of the first parameter.
            for (pat, mut vars) in self.arms(params[0]) {
                vars.extend(rest.iter().cloned());
                let body = self.with_vars(&vars, |g| g.expr(result, depth));
                let pat = if pat.contains(' ') {
                    format!("({pat})")
                } else {
                    pat
                };
                let head = [pat.as_str()].into_iter().chain(rest_names.iter().copied());
                out += &format!("{name} {} = {body}\n", head.collect::<Vec<_>>().join(" "));
            }
        } else {
            let first = self.var();
            let mut vars = vec![(first.clone(), params[0])];
            vars.extend(rest.iter().cloned());
            let body = self.with_vars(&vars, |g| g.expr(result, depth));
            let head = [first.as_str()]
                .into_iter()
                .chain(rest_names.iter().copied());
            out += &format!("{name} {} = {body}\n", head.collect::<Vec<_>>().join(" "));
        }
        self.funcs.push(Func {
            name,
            params,
            result,
        });
        out
    }
}

/// A generated program together with the type of its `main`.
#[derive(Clone, Debug)]
pub struct GenProgram {
    pub source: String,
    pub main_type: GenType,
}

/// Generates a program with up to `max_functions` helper functions and
/// expressions nested up to `depth` levels.
pub fn program<R: Rng>(rng: &mut R, max_functions: usize, depth: u32) -> GenProgram {
    let mut g = Gen {
        rng,
        vars: Vec::new(),
        funcs: Vec::new(),
        fresh: 0,
    };
    let mut source = LIBRARY.to_string();
    let nfuns = g.rng.gen_range(0..=max_functions);
    for i in 1..=nfuns {
        source.push('\n');
        source += &g.function(i, depth.saturating_sub(1).max(1));
    }
    let main_type = *GenType::ALL.choose(g.rng).expect("types");
    let body = g.expr(main_type, depth);
    source += &format!("\nmain : {}\nmain = {body}\n", main_type.name());
    GenProgram { source, main_type }
}
