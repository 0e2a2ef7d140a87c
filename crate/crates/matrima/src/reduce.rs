//! The checker and the reducer: the two per-cell operations workers run.

use lambdam::kvy::{
    decode_path_bits, leaf_cell as atom_cell, scott_bool, Cell, KvyTerm, LeafKind, Multipath,
    ARITY_STUCK, ARITY_UNKNOWN, FLAG_HNF, FLAG_NF,
};
use lambdam::prim::{op_name, PrimOp, PrimValue};

use crate::pool::{leaf_cell, node_cell, Pool};
use crate::VmError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    /// Checker arity is zero: the cell is the top of a redex.
    Reducible,
    /// Head normal form; some child is not yet in normal form.
    SetHNF,
    /// The cell is in normal form.
    SetNF,
    /// The arity of the left child is not known yet, or the cell changed
    /// while it was being checked.
    Pending,
    /// The head can never reduce and some child is not yet in normal form.
    Stuck,
}

/// Computes and stores the checker arity and normal-form flags of a cell.
pub fn check_cell(pool: &Pool, idx: u32) -> Result<CheckOutcome, VmError> {
    let c = pool.get(idx);
    if !c.is_alive() {
        return Err(VmError::DeadCell(idx));
    }
    if !c.is_node() {
        if c.flags & FLAG_NF == 0 {
            pool.replace(idx, c, leaf_cell(c));
        }
        return Ok(CheckOutcome::SetNF);
    }
    if c.flags & FLAG_NF != 0 {
        return Ok(CheckOutcome::SetNF);
    }
    let l = pool.get(c.left());
    let arity = if l.is_node() {
        match l.arity {
            ARITY_UNKNOWN | 0 => return Ok(CheckOutcome::Pending),
            ARITY_STUCK => ARITY_STUCK,
            a => a - 1,
        }
    } else {
        match l.leaf_arity() {
            Some(k) => k - 1,
            None => ARITY_STUCK,
        }
    };
    let mut flags = c.flags;
    let outcome = if arity == 0 {
        CheckOutcome::Reducible
    } else {
        flags |= FLAG_HNF;
        let r = pool.get(c.right());
        if l.flags & FLAG_NF != 0 && r.flags & FLAG_NF != 0 {
            flags |= FLAG_NF;
            CheckOutcome::SetNF
        } else if arity == ARITY_STUCK {
            CheckOutcome::Stuck
        } else {
            CheckOutcome::SetHNF
        }
    };
    if pool.replace(idx, c, Cell { flags, arity, ..c }) {
        Ok(outcome)
    } else {
        Ok(CheckOutcome::Pending)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReduceOutcome {
    /// The cell was rewritten; these cells were allocated for the result.
    Rewritten { new_cells: Vec<u32> },
    /// A primitive whose operands are not yet integers.
    Pending { operands: [u32; 2] },
    /// The cell is no longer a redex, or another worker rewrote it first.
    Raced,
}

/// Cells allocated for a rewrite, kept so that they can be returned if the
/// rewrite loses a race.
struct Builder<'a> {
    pool: &'a Pool,
    local: &'a mut Vec<u32>,
    built: Vec<(u32, Cell)>,
}

impl Builder<'_> {
    fn cell(&mut self, c: Cell) -> Result<u32, VmError> {
        let i = self.pool.alloc(self.local).ok_or(VmError::OutOfMemory)?;
        self.pool.store(i, c);
        self.built.push((i, c));
        Ok(i)
    }

    fn node(&mut self, l: u32, r: u32) -> Result<u32, VmError> {
        self.cell(node_cell(l, r))
    }

    fn abort(self) {
        for (i, _) in self.built {
            self.pool.release(i, self.local);
        }
    }

    /// Bottom-up construction of the subtree for `p`, taking the argument
    /// of each step before descending.
    fn path(
        &mut self,
        p: &Multipath,
        args: &mut impl Iterator<Item = u32>,
        w: u32,
    ) -> Result<u32, VmError> {
        Ok(match p {
            Multipath::End => w,
            Multipath::Left(q) => {
                let x = args.next().expect("argument per step");
                let sub = self.path(q, args, w)?;
                self.node(sub, x)?
            }
            Multipath::Right(q) => {
                let x = args.next().expect("argument per step");
                let sub = self.path(q, args, w)?;
                self.node(x, sub)?
            }
            Multipath::Fork(l, r) => {
                let a = self.path(l, args, w)?;
                let b = self.path(r, args, w)?;
                self.node(a, b)?
            }
        })
    }

    /// The cell to write over the top of the redex for `p`.
    fn path_top(&mut self, p: &Multipath, args: &[u32], w: u32) -> Result<Cell, VmError> {
        let args = &mut args.iter().copied();
        Ok(match p {
            Multipath::End => self.pool.get(w),
            Multipath::Left(q) => {
                let x = args.next().expect("argument per step");
                node_cell(self.path(q, args, w)?, x)
            }
            Multipath::Right(q) => {
                let x = args.next().expect("argument per step");
                node_cell(x, self.path(q, args, w)?)
            }
            Multipath::Fork(l, r) => {
                let a = self.path(l, args, w)?;
                node_cell(a, self.path(r, args, w)?)
            }
        })
    }

    fn term(&mut self, t: &KvyTerm) -> Result<u32, VmError> {
        match t {
            KvyTerm::App(f, a) => {
                let f = self.term(f)?;
                let a = self.term(a)?;
                self.node(f, a)
            }
            _ => self.cell(leaf_cell(atom(t))),
        }
    }

    fn term_top(&mut self, t: &KvyTerm) -> Result<Cell, VmError> {
        match t {
            KvyTerm::App(f, a) => {
                let f = self.term(f)?;
                Ok(node_cell(f, self.term(a)?))
            }
            _ => Ok(leaf_cell(atom(t))),
        }
    }
}

fn atom(t: &KvyTerm) -> Cell {
    atom_cell(t).expect("encodable atom").expect("atom")
}

fn int_of(c: &Cell) -> Option<i64> {
    (c.kind() == Some(LeafKind::PrimInt)).then_some(c.content as i64)
}

/// Rewrites the redex topped by `idx` in place. New cells come from
/// `local`. The rewrite is published by one compare-and-swap on the top
/// cell; reference counts are adjusted only once it succeeds.
pub fn reduce_cell(pool: &Pool, idx: u32, local: &mut Vec<u32>) -> Result<ReduceOutcome, VmError> {
    let top = pool.get(idx);
    if !top.is_alive() || !top.is_node() || top.arity != 0 {
        return Ok(ReduceOutcome::Raced);
    }
    let mut spine = vec![top];
    let head = loop {
        let l = pool.get(spine.last().expect("non-empty").left());
        if !l.is_node() {
            break l;
        }
        spine.push(l);
    };
    let k = spine.len();
    if head.leaf_arity() != Some(k as u16) {
        return Ok(ReduceOutcome::Raced);
    }
    // The i-th argument hangs off the i-th spine node from the head.
    let args: Vec<u32> = (1..=k).map(|i| spine[k - i].right()).collect();
    let mut b = Builder {
        pool,
        local,
        built: Vec::new(),
    };
    let planned = match head.kind().expect("leaf") {
        LeafKind::K => Ok(pool.get(args[0])),
        LeafKind::Y => b.node(args[0], top.left()).map(|a| node_cell(a, args[1])),
        LeafKind::V => {
            let p = decode_path_bits(head.content).map_err(|e| VmError::BadImage(e.to_string()))?;
            b.path_top(&p, &args[..k - 1], args[k - 1])
        }
        LeafKind::PrimOp => {
            let id = head.content as u32;
            let (x, y) = (pool.get(args[0]), pool.get(args[1]));
            match (int_of(&x), int_of(&y)) {
                (Some(x), Some(y)) => {
                    let op = PrimOp::from_id(id).expect("checked arity");
                    match op.apply(x, y).map_err(|_| VmError::DivisionByZero)? {
                        PrimValue::Int(n) => Ok(leaf_cell(atom(&KvyTerm::Int(n)))),
                        PrimValue::Bool(v) => b.term_top(scott_bool(v)),
                    }
                }
                _ => {
                    // A head normal form that is not an integer never will be.
                    let settled = |c: &Cell| int_of(c).is_none() && c.flags & FLAG_HNF != 0;
                    if settled(&x) || settled(&y) {
                        return Err(VmError::PrimTypeError { op: op_name(id) });
                    }
                    return Ok(ReduceOutcome::Pending {
                        operands: [args[0], args[1]],
                    });
                }
            }
        }
        LeafKind::PrimInt => return Ok(ReduceOutcome::Raced),
    };
    let new_top = match planned {
        Ok(c) => c,
        Err(e) => {
            b.abort();
            return Err(e);
        }
    };
    if !pool.replace(idx, top, new_top) {
        b.abort();
        return Ok(ReduceOutcome::Raced);
    }
    for c in b.built.iter().map(|(_, c)| c).chain([&new_top]) {
        if c.is_node() {
            pool.adjust(c.left(), 1);
            pool.adjust(c.right(), 1);
        }
    }
    pool.adjust(top.left(), -1);
    pool.adjust(top.right(), -1);
    Ok(ReduceOutcome::Rewritten {
        new_cells: b.built.into_iter().map(|(i, _)| i).collect(),
    })
}
