//! Reconstruction of typed values from normal forms.
//!
//! Scott-encoded constructors of different types can compile to the same
//! code, so a result is read back at a known type. A value of a data type
//! with `m` constructors is applied to `m` fresh probes, opaque atoms that
//! never reduce; the probe that ends up at the head names the constructor
//! and the arguments it holds are the fields.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::kvy::KvyTerm;
use crate::lower::CoreTerm;
use crate::oracle::{reduce_core, reduce_kvy, OracleError, ReduceStatus};
use crate::prim::PROBE_BASE;
use crate::typecheck::{CtorInfo, DataInfo, Type, TypedProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueTree {
    Ctor(String, Vec<ValueTree>),
    Int(i64),
    Nat(u64),
    Function,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReadbackError {
    #[error("cannot read back a value of non-ground type `{0}`")]
    NotGroundType(String),
    #[error("result is not in normal form")]
    NotNormalForm,
    #[error("value does not have type `{0}`")]
    MalformedValue(String),
    #[error("{0}")]
    Oracle(#[from] OracleError),
}

/// Constructor tables of a program.
#[derive(Clone, Copy)]
pub struct Tables<'a> {
    pub ctors: &'a HashMap<String, CtorInfo>,
    pub data: &'a BTreeMap<String, DataInfo>,
}

impl<'a> Tables<'a> {
    pub fn of(p: &'a TypedProgram) -> Self {
        Tables {
            ctors: &p.ctors,
            data: &p.data,
        }
    }

    fn nat(&self) -> Option<(String, String)> {
        crate::typecheck::infer::nat_shape(self.data, self.ctors)
    }
}

/// Steps allowed for exposing one constructor.
const PROBE_FUEL: u64 = 1_000_000;

/// Term representations a value can be read back from.
trait Probe: Sized + Clone {
    fn int(&self) -> Option<i64>;
    fn is_normal(&self) -> Result<bool, OracleError>;
    /// Applies the term to the given probe ids and reduces; returns the
    /// head probe and its arguments if the result has that shape.
    fn select(&self, probes: &[u32]) -> Result<Option<(u32, Vec<Self>)>, ReadbackError>;
}

impl Probe for KvyTerm {
    fn int(&self) -> Option<i64> {
        if let KvyTerm::Int(n) = self {
            Some(*n)
        } else {
            None
        }
    }

    fn is_normal(&self) -> Result<bool, OracleError> {
        Ok(reduce_kvy(self, 0)?.status != ReduceStatus::FuelExhausted)
    }

    fn select(&self, probes: &[u32]) -> Result<Option<(u32, Vec<Self>)>, ReadbackError> {
        let applied = KvyTerm::apps(self.clone(), probes.iter().map(|p| KvyTerm::Prim(*p)));
        let r = reduce_kvy(&applied, PROBE_FUEL)?;
        if r.status == ReduceStatus::FuelExhausted {
            return Ok(None);
        }
        let (head, args) = r.term.spine();
        Ok(match head {
            KvyTerm::Prim(p) => Some((*p, args.into_iter().cloned().collect())),
            _ => None,
        })
    }
}

impl Probe for CoreTerm {
    fn int(&self) -> Option<i64> {
        if let CoreTerm::Int(n) = self {
            Some(*n)
        } else {
            None
        }
    }

    fn is_normal(&self) -> Result<bool, OracleError> {
        Ok(reduce_core(self, 0)?.status != ReduceStatus::FuelExhausted)
    }

    fn select(&self, probes: &[u32]) -> Result<Option<(u32, Vec<Self>)>, ReadbackError> {
        let applied = CoreTerm::apps(self.clone(), probes.iter().map(|p| CoreTerm::Prim(*p)));
        let r = reduce_core(&applied, PROBE_FUEL)?;
        if r.status == ReduceStatus::FuelExhausted {
            return Ok(None);
        }
        let mut args = Vec::new();
        let mut t = r.term;
        while let CoreTerm::App(f, a) = t {
            args.push(*a);
            t = *f;
        }
        args.reverse();
        Ok(match t {
            CoreTerm::Prim(p) => Some((p, args)),
            _ => None,
        })
    }
}

/// Reads back a normal-form combinator term at a type. Type variables
/// are rejected only where a value of that type has to be inspected.
pub fn readback(t: &KvyTerm, ty: &Type, tables: Tables<'_>) -> Result<ValueTree, ReadbackError> {
    Reader {
        tables,
        next_probe: PROBE_BASE,
    }
    .start(t, ty)
}

/// Reads back a normal-form lambda term at a type.
pub fn readback_core(
    t: &CoreTerm,
    ty: &Type,
    tables: Tables<'_>,
) -> Result<ValueTree, ReadbackError> {
    Reader {
        tables,
        next_probe: PROBE_BASE,
    }
    .start(t, ty)
}

struct Reader<'a> {
    tables: Tables<'a>,
    next_probe: u32,
}

impl Reader<'_> {
    fn start<T: Probe>(&mut self, t: &T, ty: &Type) -> Result<ValueTree, ReadbackError> {
        if !t.is_normal()? {
            return Err(ReadbackError::NotNormalForm);
        }
        self.value(t, ty)
    }

    fn fresh_probes(&mut self, n: usize) -> Vec<u32> {
        let first = self.next_probe;
        self.next_probe += n as u32;
        (first..self.next_probe).collect()
    }

    fn value<T: Probe>(&mut self, t: &T, ty: &Type) -> Result<ValueTree, ReadbackError> {
        let malformed = || ReadbackError::MalformedValue(ty.to_string());
        match ty {
            Type::Arrow(..) => Ok(ValueTree::Function),
            Type::Con(name, _) if name == "Int" => {
                t.int().map(ValueTree::Int).ok_or_else(malformed)
            }
            Type::Con(name, args) => {
                if name == "Nat" {
                    if let Some((succ, _)) = self.tables.nat() {
                        return self.nat(t, &succ, ty);
                    }
                }
                let data = self.tables.data.get(name).ok_or_else(malformed)?;
                if data.ctors.is_empty() {
                    return Err(malformed());
                }
                let (ctor, fields) = self.select(t, data, ty)?;
                let info = &self.tables.ctors[&ctor];
                let inst: HashMap<_, _> = info
                    .params
                    .iter()
                    .copied()
                    .zip(args.iter().cloned())
                    .collect();
                let field_types: Vec<Type> = info.fields.iter().map(|f| f.rename(&inst)).collect();
                let values = fields
                    .iter()
                    .zip(&field_types)
                    .map(|(f, fty)| self.value(f, fty))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ValueTree::Ctor(ctor, values))
            }
            Type::Var(_) => Err(ReadbackError::NotGroundType(ty.to_string())),
        }
    }

    /// Which constructor `t` is, and its fields.
    fn select<T: Probe>(
        &mut self,
        t: &T,
        data: &DataInfo,
        ty: &Type,
    ) -> Result<(String, Vec<T>), ReadbackError> {
        let probes = self.fresh_probes(data.ctors.len());
        let (head, args) = t
            .select(&probes)?
            .ok_or_else(|| ReadbackError::MalformedValue(ty.to_string()))?;
        let index = probes
            .iter()
            .position(|p| *p == head)
            .ok_or_else(|| ReadbackError::MalformedValue(ty.to_string()))?;
        let ctor = data.ctors[index].clone();
        if args.len() != self.tables.ctors[&ctor].arity() {
            return Err(ReadbackError::MalformedValue(ty.to_string()));
        }
        Ok((ctor, args))
    }

    /// Counts successors iteratively, so deep numerals need no deep stack.
    fn nat<T: Probe>(&mut self, t: &T, succ: &str, ty: &Type) -> Result<ValueTree, ReadbackError> {
        let data = &self.tables.data["Nat"];
        let mut n = 0u64;
        let mut cur = t.clone();
        loop {
            let (ctor, mut fields) = self.select(&cur, data, ty)?;
            if ctor != succ {
                return Ok(ValueTree::Nat(n));
            }
            n += 1;
            cur = fields.pop().expect("successor has one field");
        }
    }
}

/// Constructor syntax, with parentheses around nested applications;
/// naturals print in decimal.
pub fn render(v: &ValueTree) -> String {
    v.to_string()
}

impl ValueTree {
    fn atomic(&self) -> bool {
        match self {
            ValueTree::Ctor(_, args) => args.is_empty(),
            ValueTree::Int(n) => *n >= 0,
            _ => true,
        }
    }
}

impl fmt::Display for ValueTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueTree::Ctor(c, args) => {
                f.write_str(c)?;
                for a in args {
                    if a.atomic() {
                        write!(f, " {a}")?;
                    } else {
                        write!(f, " ({a})")?;
                    }
                }
                Ok(())
            }
            ValueTree::Int(n) => write!(f, "{n}"),
            ValueTree::Nat(n) => write!(f, "{n}"),
            ValueTree::Function => f.write_str("<function>"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kvy::compile_core;
    use crate::lower::lower;
    use crate::syntax::load_source;
    use crate::typecheck::infer;

    fn run(src: &str) -> (String, String) {
        let p = infer(&load_source("Main.lm", src, &[]).unwrap()).unwrap();
        let core = lower(&p).unwrap();
        let ty = p.entry_scheme().ty.clone();
        let core_nf = reduce_core(&core, 1_000_000).unwrap().term;
        let via_core = render(&readback_core(&core_nf, &ty, Tables::of(&p)).unwrap());
        let kvy = compile_core(&core).unwrap();
        let nf = reduce_kvy(&kvy, 1_000_000).unwrap().term;
        let via_kvy = render(&readback(&nf, &ty, Tables::of(&p)).unwrap());
        (via_core, via_kvy)
    }

    #[test]
    fn rendering() {
        let one = ValueTree::Nat(1);
        let nil = ValueTree::Ctor("Nil".into(), vec![]);
        assert_eq!(
            render(&ValueTree::Ctor("Cons".into(), vec![one, nil])),
            "Cons 1 Nil"
        );
        assert_eq!(render(&ValueTree::Nat(0)), "0");
        let sz = ValueTree::Ctor("S".into(), vec![ValueTree::Ctor("Z".into(), vec![])]);
        assert_eq!(
            render(&ValueTree::Ctor("Just".into(), vec![sz])),
            "Just (S Z)"
        );
        assert_eq!(
            render(&ValueTree::Ctor("Just".into(), vec![ValueTree::Int(-2)])),
            "Just (-2)"
        );
    }

    #[test]
    fn plus_one_one() {
        let src = "plus Z n = n\nplus (S m) n = S (plus m n)\nmain = plus 1 1\n";
        assert_eq!(run(src), ("2".into(), "2".into()));
    }

    #[test]
    fn booleans_lists_functions() {
        assert_eq!(run("main = True\n").1, "True");
        let list = "data List a = Nil | Cons a (List a)\nmain = Cons 1 (Cons 2 Nil)\n";
        assert_eq!(
            run(list),
            ("Cons 1 (Cons 2 Nil)".into(), "Cons 1 (Cons 2 Nil)".into())
        );
        assert_eq!(run("id x = x\nmain = id\n").1, "<function>");
        let ints = "main = #sub (#mul 6 7) 50\n";
        assert_eq!(run(ints).1, "-8");
    }

    #[test]
    fn polymorphic_results_rejected() {
        let p = infer(&load_source("Main.lm", "id x = x\nmain = id\n", &[]).unwrap()).unwrap();
        let err = readback(&KvyTerm::K, &Type::Var(0), Tables::of(&p)).unwrap_err();
        assert!(matches!(err, ReadbackError::NotGroundType(_)));
    }
}
