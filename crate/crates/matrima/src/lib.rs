//! Matrima: a parallel graph reduction machine for KVY cell images.
//!
//! A [`Pool`] holds 128-bit cells that worker threads check and rewrite
//! in place without locks. The checker propagates arities up application
//! spines; a node whose arity reaches zero is a redex and is rewritten by
//! the reducer. Cells are freed by reference counting during
//! stop-the-world recycle passes. [`run`] supervises one process until its
//! root reaches normal form.

mod audit;
mod pool;
mod reduce;
mod run;

use std::time::Duration;

use thiserror::Error;

pub use audit::{
    audit_checker, audit_refcounts, reachable, unreachable_alive, CheckerViolation,
    RefcountMismatch,
};
pub use pool::{Pool, MAX_CAPACITY};
pub use reduce::{check_cell, reduce_cell, CheckOutcome, ReduceOutcome};
pub use run::{run, run_observed, Observer, Outcome, RunConfig};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VmError {
    #[error("pool capacity {requested} exceeds 2^32 cells")]
    CapacityTooLarge { requested: u64 },
    #[error("out of memory")]
    OutOfMemory,
    #[error("division by zero")]
    DivisionByZero,
    #[error("primitive `#{op}` applied to a non-integer")]
    PrimTypeError { op: String },
    #[error("cell {0} is not alive")]
    DeadCell(u32),
    #[error("process has not finished")]
    NotDone,
    #[error("no work remains but the root is not in normal form")]
    Stuck,
    #[error("invalid image: {0}")]
    BadImage(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcessStatus {
    Running,
    Done,
    Error(VmError),
    FuelExhausted,
    /// Reserved for input primitives; nothing enters this state yet.
    WaitingInput,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub reductions: u64,
    pub allocations: u64,
    pub recycle_passes: u64,
    pub peak_live_cells: u64,
    /// Reference count updates that hit the limits of the stored field.
    pub refcount_saturations: u64,
    pub elapsed: Duration,
}

/// A program loaded into a pool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessHandle {
    pub root: u32,
    pub status: ProcessStatus,
    pub stats: RunStats,
}
