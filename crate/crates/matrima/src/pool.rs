//! The cell pool: an array of atomic 128-bit cells with per-worker free
//! lists.

use std::sync::atomic::{AtomicU64, Ordering::SeqCst};
use std::sync::Mutex;

use lambdam::kvy::{
    cells_to_term, emit_image, Cell, CellImage, ARITY_STUCK, ARITY_UNKNOWN, FLAG_ALIVE, FLAG_HNF,
    FLAG_IS_NODE, FLAG_NF, REFCOUNT_BIAS,
};
use portable_atomic::AtomicU128;

use crate::{ProcessHandle, ProcessStatus, RunStats, VmError};

/// Cell indices are 32 bits wide.
pub const MAX_CAPACITY: u64 = 1 << 32;

/// Cells a worker takes from the untouched region at a time.
const BLOCK: u64 = 64;

/// Bits of a cell word holding the reference count.
const REFCOUNT_BITS: u128 = 0xFFFF << 80;

pub struct Pool {
    cells: Box<[AtomicU128]>,
    /// First never-allocated index.
    high_water: AtomicU64,
    /// Free lists, one per worker. A running worker owns its list; the
    /// mutexes are only touched when workers start, stop or pause.
    shards: Vec<Mutex<Vec<u32>>>,
    roots: Vec<u32>,
    live: AtomicU64,
    peak_live: AtomicU64,
    saturations: AtomicU64,
}

impl Pool {
    pub fn new(capacity: u64, workers: usize) -> Result<Pool, VmError> {
        if capacity > MAX_CAPACITY {
            return Err(VmError::CapacityTooLarge {
                requested: capacity,
            });
        }
        Ok(Pool {
            cells: (0..capacity).map(|_| AtomicU128::new(0)).collect(),
            high_water: AtomicU64::new(0),
            shards: (0..workers.max(1))
                .map(|_| Mutex::new(Vec::new()))
                .collect(),
            roots: Vec::new(),
            live: AtomicU64::new(0),
            peak_live: AtomicU64::new(0),
            saturations: AtomicU64::new(0),
        })
    }

    pub fn capacity(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn shard_count(&self) -> usize {
        self.shards.len()
    }

    /// Cells currently allocated, including garbage not yet recycled.
    pub fn live_cells(&self) -> u64 {
        self.live.load(SeqCst)
    }

    pub fn peak_live_cells(&self) -> u64 {
        self.peak_live.load(SeqCst)
    }

    pub fn refcount_saturations(&self) -> u64 {
        self.saturations.load(SeqCst)
    }

    /// Registered process roots.
    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Cells that have ever been handed out lie below this index.
    pub fn used_extent(&self) -> u32 {
        self.high_water.load(SeqCst).min(self.capacity()) as u32
    }

    pub fn get(&self, i: u32) -> Cell {
        Cell::from_bits(self.cells[i as usize].load(SeqCst))
    }

    pub fn alive_cells(&self) -> impl Iterator<Item = (u32, Cell)> + '_ {
        (0..self.used_extent())
            .map(|i| (i, self.get(i)))
            .filter(|(_, c)| c.is_alive())
    }

    /// Unallocated cells: on free lists or never touched.
    pub fn free_cells(&self) -> u64 {
        let listed: usize = self
            .shards
            .iter()
            .map(|s| s.lock().expect("shard lock").len())
            .sum();
        listed as u64 + self.capacity() - u64::from(self.used_extent())
    }

    pub(crate) fn store(&self, i: u32, c: Cell) {
        self.cells[i as usize].store(c.to_bits(), SeqCst);
    }

    /// Atomically applies `f` to the cell; `None` from `f` leaves it
    /// unchanged. Returns the cell before the update.
    pub(crate) fn update(
        &self,
        i: u32,
        mut f: impl FnMut(Cell) -> Option<Cell>,
    ) -> Result<Cell, Cell> {
        self.cells[i as usize]
            .fetch_update(SeqCst, SeqCst, |bits| {
                f(Cell::from_bits(bits)).map(Cell::to_bits)
            })
            .map(Cell::from_bits)
            .map_err(Cell::from_bits)
    }

    /// Replaces all fields but the reference count, provided nothing but
    /// the reference count changed since `expected` was read.
    pub(crate) fn replace(&self, i: u32, expected: Cell, new: Cell) -> bool {
        let want = expected.to_bits() & !REFCOUNT_BITS;
        self.update(i, |cur| {
            (cur.to_bits() & !REFCOUNT_BITS == want).then_some(Cell {
                refcount: cur.refcount,
                ..new
            })
        })
        .is_ok()
    }

    /// Adds `delta` to the stored reference count, saturating at the
    /// limits of the 16-bit field.
    pub(crate) fn adjust(&self, i: u32, delta: i32) {
        let old = self
            .update(i, |c| {
                let n = (i32::from(c.refcount) + delta).clamp(0, i32::from(u16::MAX));
                Some(Cell {
                    refcount: n as u16,
                    ..c
                })
            })
            .expect("update always applies");
        let wanted = i32::from(old.refcount) + delta;
        if !(0..=i32::from(u16::MAX)).contains(&wanted) {
            self.saturations.fetch_add(1, SeqCst);
        }
    }

    /// Takes a free index from `local`, refilling it from the untouched
    /// region when empty.
    pub(crate) fn alloc(&self, local: &mut Vec<u32>) -> Option<u32> {
        let i = match local.pop() {
            Some(i) => i,
            None => {
                let cap = self.capacity();
                let start = self.high_water.fetch_add(BLOCK, SeqCst);
                if start >= cap {
                    return None;
                }
                let end = (start + BLOCK).min(cap);
                local.extend((start + 1..end).rev().map(|i| i as u32));
                start as u32
            }
        };
        let live = self.live.fetch_add(1, SeqCst) + 1;
        self.peak_live.fetch_max(live, SeqCst);
        Some(i)
    }

    /// Returns a cell that was allocated but never made reachable.
    pub(crate) fn release(&self, i: u32, local: &mut Vec<u32>) {
        self.store(i, Cell::default());
        self.live.fetch_sub(1, SeqCst);
        local.push(i);
    }

    pub(crate) fn take_shard(&self, w: usize) -> Vec<u32> {
        std::mem::take(&mut *self.shards[w].lock().expect("shard lock"))
    }

    pub(crate) fn put_shard(&self, w: usize, free: Vec<u32>) {
        self.shards[w].lock().expect("shard lock").extend(free);
    }

    pub(crate) fn ensure_shards(&mut self, n: usize) {
        while self.shards.len() < n {
            self.shards.push(Mutex::new(Vec::new()));
        }
    }

    /// Copies an image into the pool and registers its root.
    pub fn load_process(&mut self, img: &CellImage) -> Result<ProcessHandle, VmError> {
        let n = img.cells.len();
        if img.root as usize >= n {
            return Err(VmError::BadImage("root index out of range".into()));
        }
        let mut counts = vec![0u64; n];
        counts[img.root as usize] += 1;
        for (i, c) in img.cells.iter().enumerate() {
            if !c.is_alive() {
                return Err(VmError::BadImage(format!("cell {i} is not alive")));
            }
            if c.is_node() {
                for child in [c.left(), c.right()] {
                    *counts.get_mut(child as usize).ok_or_else(|| {
                        VmError::BadImage(format!("cell {i}: child index out of range"))
                    })? += 1;
                }
            } else if c.kind().is_none() {
                return Err(VmError::BadImage(format!("cell {i}: unknown leaf kind")));
            }
        }
        if n as u64 > self.free_cells() {
            return Err(VmError::OutOfMemory);
        }
        let mut local = self.take_shard(0);
        let map: Vec<u32> = (0..n)
            .map(|_| self.alloc(&mut local).expect("free cells counted"))
            .collect();
        self.put_shard(0, local);
        for (i, c) in img.cells.iter().enumerate() {
            let refcount = (u64::from(REFCOUNT_BIAS) + counts[i]).min(u64::from(u16::MAX)) as u16;
            let cell = if c.is_node() {
                Cell {
                    refcount,
                    ..Cell::node(map[c.left() as usize], map[c.right() as usize])
                }
            } else {
                Cell {
                    flags: c.flags | FLAG_ALIVE | FLAG_HNF | FLAG_NF,
                    refcount,
                    arity: c.leaf_arity().unwrap_or(ARITY_STUCK),
                    ..*c
                }
            };
            self.store(map[i], cell);
        }
        let root = map[img.root as usize];
        self.roots.push(root);
        Ok(ProcessHandle {
            root,
            status: ProcessStatus::Running,
            stats: RunStats::default(),
        })
    }

    /// Drops the root registration of a process, leaving its cells to the
    /// next recycle pass.
    pub fn release_process(&mut self, h: &ProcessHandle) {
        if let Some(pos) = self.roots.iter().position(|r| *r == h.root) {
            self.roots.swap_remove(pos);
            self.adjust(h.root, -1);
        }
    }

    /// Frees every cell whose reference count has dropped to zero or
    /// below, cascading into children. Must not run concurrently with
    /// workers.
    pub fn recycle(&mut self) -> u64 {
        self.recycle_paused().len() as u64
    }

    /// Recycle pass for a pool whose workers are all paused; returns the
    /// freed indices.
    pub(crate) fn recycle_paused(&self) -> Vec<u32> {
        let dead = |c: &Cell| c.is_alive() && c.refcount <= REFCOUNT_BIAS;
        let mut stack: Vec<u32> = self
            .alive_cells()
            .filter(|(_, c)| dead(c))
            .map(|(i, _)| i)
            .collect();
        let mut freed = Vec::new();
        while let Some(i) = stack.pop() {
            let c = self.get(i);
            if !dead(&c) {
                continue;
            }
            self.store(i, Cell::default());
            freed.push(i);
            if c.is_node() {
                for child in [c.left(), c.right()] {
                    self.adjust(child, -1);
                    if dead(&self.get(child)) {
                        stack.push(child);
                    }
                }
            }
        }
        self.live.fetch_sub(freed.len() as u64, SeqCst);
        // Deal all free cells out evenly so no worker starves while
        // another holds a surplus.
        let mut all: Vec<u32> = freed.clone();
        for w in 0..self.shards.len() {
            all.extend(self.take_shard(w));
        }
        all.sort_unstable_by(|a, b| b.cmp(a));
        let n = self.shards.len();
        let mut dealt = vec![Vec::new(); n];
        for (k, i) in all.into_iter().enumerate() {
            dealt[k % n].push(i);
        }
        for (w, free) in dealt.into_iter().enumerate() {
            self.put_shard(w, free);
        }
        freed
    }

    /// The result of a finished process as a canonical image: the term
    /// under the root, unfolded and laid out in preorder, so the bytes do
    /// not depend on how the cells happened to be shared in the pool.
    pub fn compress(&self, h: &ProcessHandle) -> Result<CellImage, VmError> {
        if h.status != ProcessStatus::Done {
            return Err(VmError::NotDone);
        }
        let cap = self.capacity();
        let term = cells_to_term(&|i| (u64::from(i) < cap).then(|| self.get(i)), h.root)
            .map_err(|e| VmError::BadImage(e.to_string()))?;
        emit_image(&term).map_err(|e| VmError::BadImage(e.to_string()))
    }
}

/// Leaf cells are born in normal form.
pub(crate) fn leaf_cell(c: Cell) -> Cell {
    Cell {
        flags: c.flags | FLAG_HNF | FLAG_NF,
        arity: c.leaf_arity().unwrap_or(ARITY_STUCK),
        ..c
    }
}

/// A fresh node with no checker information.
pub(crate) fn node_cell(l: u32, r: u32) -> Cell {
    Cell {
        flags: FLAG_ALIVE | FLAG_IS_NODE,
        arity: ARITY_UNKNOWN,
        ..Cell::node(l, r)
    }
}
