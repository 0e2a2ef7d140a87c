//! Sequential reference reducers: the ground truth for the compiler and
//! the virtual machine.
//!
//! Both reducers use leftmost-outermost order. `Y` unfolds only with two
//! arguments. Primitives are strict: a saturated primitive fires once both
//! arguments are integers and is skipped while they are still reducible.

mod core;
mod kvy;

use thiserror::Error;

pub use self::core::{alpha_eq, reduce_core, step_core};
pub use kvy::{reduce_kvy, reduce_kvy_with, step_kvy, v_composite, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceStatus {
    /// No redex remains.
    NormalForm,
    /// The step budget ran out first.
    FuelExhausted,
    /// No redex remains, but a primitive is blocked on an opaque atom.
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceResult<T> {
    pub term: T,
    pub status: ReduceStatus,
    pub steps: u64,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("primitive `#{op}` applied to a non-integer")]
    PrimTypeError { op: String },
    #[error("division by zero")]
    DivisionByZero,
}
