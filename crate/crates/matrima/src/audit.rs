//! Consistency checks for a quiescent pool, recomputed from scratch.

use std::collections::BTreeSet;

use lambdam::kvy::{ARITY_STUCK, ARITY_UNKNOWN, FLAG_HNF, FLAG_NF, REFCOUNT_BIAS};

use crate::pool::Pool;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefcountMismatch {
    pub cell: u32,
    /// Stored (biased) count.
    pub stored: u16,
    /// References actually found, plus the bias.
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckerViolation {
    pub cell: u32,
    pub problem: String,
}

/// Compares every alive cell's stored count with the references held by
/// alive nodes and root registrations.
pub fn audit_refcounts(pool: &Pool) -> Vec<RefcountMismatch> {
    let mut counts = vec![0u64; pool.used_extent() as usize];
    for r in pool.roots() {
        counts[*r as usize] += 1;
    }
    for (_, c) in pool.alive_cells() {
        if c.is_node() {
            counts[c.left() as usize] += 1;
            counts[c.right() as usize] += 1;
        }
    }
    pool.alive_cells()
        .filter_map(|(i, c)| {
            let expected = counts[i as usize] + u64::from(REFCOUNT_BIAS);
            (u64::from(c.refcount) != expected).then_some(RefcountMismatch {
                cell: i,
                stored: c.refcount,
                expected,
            })
        })
        .collect()
}

/// Checks stored arities against a walk down each left spine, and the
/// implications between the normal-form flags.
pub fn audit_checker(pool: &Pool) -> Vec<CheckerViolation> {
    let mut out = Vec::new();
    let mut flag = |cell: u32, problem: String| out.push(CheckerViolation { cell, problem });
    for (i, c) in pool.alive_cells() {
        let nf = c.flags & FLAG_NF != 0;
        if nf && c.flags & FLAG_HNF == 0 {
            flag(i, "normal form without head normal form".into());
        }
        if !c.is_node() {
            let want = c.leaf_arity().unwrap_or(ARITY_STUCK);
            if c.arity != want {
                flag(i, format!("leaf arity {} instead of {want}", c.arity));
            }
            continue;
        }
        if nf {
            for child in [c.left(), c.right()] {
                if pool.get(child).flags & FLAG_NF == 0 {
                    flag(i, format!("normal form over child {child} that is not"));
                }
            }
        }
        if c.arity == ARITY_UNKNOWN {
            continue;
        }
        let mut depth = 1u32;
        let mut head = pool.get(c.left());
        while head.is_node() {
            depth += 1;
            head = pool.get(head.left());
        }
        let want = match head.leaf_arity() {
            None => Some(ARITY_STUCK),
            Some(h) => u32::from(h).checked_sub(depth).map(|a| a as u16),
        };
        if want != Some(c.arity) {
            flag(
                i,
                format!("stored arity {} but spine gives {want:?}", c.arity),
            );
        }
    }
    out
}

/// Cells reachable from `roots`.
pub fn reachable(pool: &Pool, roots: &[u32]) -> BTreeSet<u32> {
    let mut seen = BTreeSet::new();
    let mut stack = roots.to_vec();
    while let Some(i) = stack.pop() {
        if seen.insert(i) {
            let c = pool.get(i);
            if c.is_node() {
                stack.push(c.left());
                stack.push(c.right());
            }
        }
    }
    seen
}

/// Alive cells that no registered root reaches.
pub fn unreachable_alive(pool: &Pool) -> BTreeSet<u32> {
    let live = reachable(pool, pool.roots());
    pool.alive_cells()
        .map(|(i, _)| i)
        .filter(|i| !live.contains(i))
        .collect()
}
