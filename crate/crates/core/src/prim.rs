//! Primitive operations on 64-bit integers.
//!
//! Every primitive takes two `Int` arguments and is strict in both. The
//! comparison primitives answer with a Scott-encoded `Bool`.

use thiserror::Error;

/// Operation identifiers at or above this value are probes: opaque atoms
/// that never reduce. They are used by readback and by tests.
pub const PROBE_BASE: u32 = 0x8000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Lt,
    Le,
}

pub const ALL_PRIMS: [PrimOp; 8] = [
    PrimOp::Add,
    PrimOp::Sub,
    PrimOp::Mul,
    PrimOp::Div,
    PrimOp::Rem,
    PrimOp::Eq,
    PrimOp::Lt,
    PrimOp::Le,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimValue {
    Int(i64),
    Bool(bool),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PrimError {
    #[error("division by zero")]
    DivisionByZero,
}

impl PrimOp {
    pub fn from_name(name: &str) -> Option<PrimOp> {
        ALL_PRIMS.into_iter().find(|p| p.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            PrimOp::Add => "add",
            PrimOp::Sub => "sub",
            PrimOp::Mul => "mul",
            PrimOp::Div => "div",
            PrimOp::Rem => "rem",
            PrimOp::Eq => "eq",
            PrimOp::Lt => "lt",
            PrimOp::Le => "le",
        }
    }

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: u32) -> Option<PrimOp> {
        ALL_PRIMS.get(id as usize).copied()
    }

    pub fn arity(self) -> u32 {
        2
    }

    pub fn returns_bool(self) -> bool {
        matches!(self, PrimOp::Eq | PrimOp::Lt | PrimOp::Le)
    }

    /// Arithmetic wraps on overflow; division truncates toward zero.
    pub fn apply(self, a: i64, b: i64) -> Result<PrimValue, PrimError> {
        Ok(match self {
            PrimOp::Add => PrimValue::Int(a.wrapping_add(b)),
            PrimOp::Sub => PrimValue::Int(a.wrapping_sub(b)),
            PrimOp::Mul => PrimValue::Int(a.wrapping_mul(b)),
            PrimOp::Div if b == 0 => return Err(PrimError::DivisionByZero),
            PrimOp::Div => PrimValue::Int(a.wrapping_div(b)),
            PrimOp::Rem if b == 0 => return Err(PrimError::DivisionByZero),
            PrimOp::Rem => PrimValue::Int(a.wrapping_rem(b)),
            PrimOp::Eq => PrimValue::Bool(a == b),
            PrimOp::Lt => PrimValue::Bool(a < b),
            PrimOp::Le => PrimValue::Bool(a <= b),
        })
    }
}

/// Printed name of an operation identifier: `add`, or `probe3` for probes.
pub fn op_name(id: u32) -> String {
    match PrimOp::from_id(id) {
        Some(p) => p.name().to_string(),
        None if id >= PROBE_BASE => format!("probe{}", id - PROBE_BASE),
        None => format!("op{id}"),
    }
}

/// Inverse of [`op_name`].
pub fn op_id(name: &str) -> Option<u32> {
    if let Some(p) = PrimOp::from_name(name) {
        return Some(p.id());
    }
    if let Some(n) = name.strip_prefix("probe") {
        return n
            .parse::<u32>()
            .ok()
            .filter(|n| *n < PROBE_BASE)
            .map(|n| n + PROBE_BASE);
    }
    None
}

/// Number of arguments after which the operation fires; probes never do.
pub fn op_arity(id: u32) -> Option<u32> {
    PrimOp::from_id(id).map(PrimOp::arity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for p in ALL_PRIMS {
            assert_eq!(op_id(&op_name(p.id())), Some(p.id()));
        }
        assert_eq!(op_id("probe7"), Some(PROBE_BASE + 7));
        assert_eq!(op_name(PROBE_BASE + 7), "probe7");
        assert_eq!(op_arity(PROBE_BASE), None);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(PrimOp::Add.apply(2, 3), Ok(PrimValue::Int(5)));
        assert_eq!(PrimOp::Sub.apply(i64::MIN, 1), Ok(PrimValue::Int(i64::MAX)));
        assert_eq!(PrimOp::Div.apply(7, -2), Ok(PrimValue::Int(-3)));
        assert_eq!(PrimOp::Rem.apply(7, 0), Err(PrimError::DivisionByZero));
        assert_eq!(PrimOp::Le.apply(3, 3), Ok(PrimValue::Bool(true)));
    }
}
