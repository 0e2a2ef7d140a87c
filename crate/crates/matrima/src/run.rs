//! The supervisor: worker threads, scheduling and the recycle barrier.
//!
//! Each worker keeps a LIFO deque of cells to examine. A task either asks
//! for a cell's head normal form or for its full normal form; the
//! follow-up tasks a worker pushes for a cell's left spine end up on top
//! of its deque, so every worker on its own proceeds in normal order.
//! Idle workers steal the oldest tasks of others, and with nothing else to
//! do they speculatively reduce freshly built cells a bounded number of
//! steps ahead.
//!
//! When too many cells are live, the first worker to notice asks for a
//! pause; all workers park their tasks and free lists at a barrier, one
//! of them recycles, and everybody resumes.

use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, AtomicU8, Ordering::SeqCst};
use std::sync::{Barrier, Mutex};
use std::time::{Duration, Instant};

use crossbeam_deque::{Injector, Steal, Stealer, Worker};
use lambdam::kvy::{CellImage, FLAG_HNF, FLAG_NF};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::pool::Pool;
use crate::reduce::{check_cell, reduce_cell, CheckOutcome, ReduceOutcome};
use crate::{ProcessHandle, ProcessStatus, VmError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub workers: usize,
    /// Reductions allowed before the run gives up.
    pub fuel: u64,
    /// Live cells that trigger a recycle pass; zero means three quarters
    /// of the pool.
    pub recycle_threshold: u64,
    /// Seeds the order in which idle workers pick victims to steal from.
    pub seed: u64,
    /// Whether idle workers may reduce cells nobody has asked for yet.
    pub speculation: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            fuel: 10_000_000,
            recycle_threshold: 0,
            seed: 0,
            speculation: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The root reached normal form; the compressed result.
    Done(CellImage),
    Error(VmError),
    FuelExhausted,
}

/// Hook for inspecting the pool while every worker is paused.
pub trait Observer: Sync {
    /// Called before a recycle pass with `freed = None`, and after it with
    /// the cells the pass freed.
    fn quiescent(&self, pool: &Pool, freed: Option<&[u32]>);
}

struct Silent;

impl Observer for Silent {
    fn quiescent(&self, _: &Pool, _: Option<&[u32]>) {}
}

/// Speculative work goes at most this many reductions ahead.
const SPECULATION_DEPTH: u8 = 2;

#[derive(Clone, Copy, Debug)]
enum Task {
    /// Reduce the cell to head normal form.
    Head(u32),
    /// Reduce the cell to normal form.
    Norm(u32),
    /// Reduce the cell if it is a redex; nobody depends on the result.
    Spec(u32, u8),
}

impl Task {
    fn cell(self) -> u32 {
        match self {
            Task::Head(c) | Task::Norm(c) | Task::Spec(c, _) => c,
        }
    }
}

const RUNNING: u8 = 0;
const PAUSE: u8 = 1;
const STOP: u8 = 2;

enum Stop {
    Done,
    Fuel,
    Error(VmError),
}

struct Shared<'a> {
    pool: &'a Pool,
    root: u32,
    cfg: &'a RunConfig,
    threshold: u64,
    observer: &'a dyn Observer,
    state: AtomicU8,
    stop_requested: AtomicBool,
    stop_reason: Mutex<Option<Stop>>,
    stealers: Vec<Stealer<Task>>,
    speculative: Injector<Task>,
    barrier: Barrier,
    parked: Mutex<Vec<Vec<Task>>>,
    /// Needed tasks queued or being processed.
    pending: AtomicI64,
    reductions: AtomicU64,
    allocations: AtomicU64,
    allocated_since_recycle: AtomicU64,
    recycles: AtomicU64,
}

/// Runs a loaded process until its root is in normal form, an error
/// occurs or the fuel runs out.
pub fn run(pool: &mut Pool, h: &mut ProcessHandle, cfg: &RunConfig) -> Outcome {
    run_observed(pool, h, cfg, &Silent)
}

pub fn run_observed(
    pool: &mut Pool,
    h: &mut ProcessHandle,
    cfg: &RunConfig,
    observer: &dyn Observer,
) -> Outcome {
    let started = Instant::now();
    let n = cfg.workers.max(1);
    pool.ensure_shards(n);
    let pool: &Pool = pool;
    let threshold = if cfg.recycle_threshold == 0 {
        pool.capacity() / 4 * 3
    } else {
        cfg.recycle_threshold
    };
    let deques: Vec<Worker<Task>> = (0..n).map(|_| Worker::new_lifo()).collect();
    let shared = Shared {
        pool,
        root: h.root,
        cfg,
        threshold,
        observer,
        state: AtomicU8::new(RUNNING),
        stop_requested: AtomicBool::new(false),
        stop_reason: Mutex::new(None),
        stealers: deques.iter().map(Worker::stealer).collect(),
        speculative: Injector::new(),
        barrier: Barrier::new(n),
        parked: Mutex::new(vec![Vec::new(); n]),
        pending: AtomicI64::new(0),
        reductions: AtomicU64::new(0),
        allocations: AtomicU64::new(0),
        allocated_since_recycle: AtomicU64::new(0),
        recycles: AtomicU64::new(0),
    };
    shared.push(&deques[0], Task::Norm(h.root));
    std::thread::scope(|s| {
        for (w, deque) in deques.into_iter().enumerate() {
            let shared = &shared;
            s.spawn(move || shared.work(w, deque));
        }
    });
    let reason = shared.stop_reason.lock().expect("stop lock").take();
    h.stats.reductions += shared.reductions.load(SeqCst);
    h.stats.allocations += shared.allocations.load(SeqCst);
    h.stats.recycle_passes += shared.recycles.load(SeqCst);
    h.stats.peak_live_cells = h.stats.peak_live_cells.max(pool.peak_live_cells());
    h.stats.refcount_saturations = pool.refcount_saturations();
    h.stats.elapsed += started.elapsed();
    let outcome = match reason {
        Some(Stop::Done) => {
            h.status = ProcessStatus::Done;
            match pool.compress(h) {
                Ok(img) => return Outcome::Done(img),
                Err(e) => Outcome::Error(e),
            }
        }
        Some(Stop::Fuel) => Outcome::FuelExhausted,
        Some(Stop::Error(e)) => Outcome::Error(e),
        None => Outcome::Error(VmError::Stuck),
    };
    h.status = match &outcome {
        Outcome::FuelExhausted => ProcessStatus::FuelExhausted,
        Outcome::Error(e) => ProcessStatus::Error(e.clone()),
        Outcome::Done(_) => unreachable!(),
    };
    outcome
}

impl Shared<'_> {
    fn push(&self, deque: &Worker<Task>, t: Task) {
        if !matches!(t, Task::Spec(..)) {
            self.pending.fetch_add(1, SeqCst);
        }
        deque.push(t);
    }

    fn stop(&self, why: Stop) {
        let mut reason = self.stop_reason.lock().expect("stop lock");
        if reason.is_none() {
            *reason = Some(why);
        }
        self.stop_requested.store(true, SeqCst);
    }

    fn request_pause(&self) {
        let _ = self.state.compare_exchange(RUNNING, PAUSE, SeqCst, SeqCst);
    }

    fn root_done(&self) -> bool {
        self.pool.get(self.root).flags & FLAG_NF != 0
    }

    fn work(&self, w: usize, deque: Worker<Task>) {
        let mut free = self.pool.take_shard(w);
        let mut rng =
            StdRng::seed_from_u64(self.cfg.seed ^ (w as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut oom_epoch = None;
        let mut idle = 0u32;
        loop {
            match self.state.load(SeqCst) {
                PAUSE => {
                    self.pause(w, &deque, &mut free);
                    continue;
                }
                STOP => break,
                _ => {}
            }
            if self.stop_requested.load(SeqCst) {
                let _ = self.state.compare_exchange(RUNNING, STOP, SeqCst, SeqCst);
                continue;
            }
            if self.root_done() {
                self.stop(Stop::Done);
                continue;
            }
            let Some(task) = self.find(w, &deque, &mut rng) else {
                if self.pending.load(SeqCst) == 0 && !self.root_done() {
                    self.stop(Stop::Error(VmError::Stuck));
                }
                idle += 1;
                if idle < 64 {
                    std::thread::yield_now();
                } else {
                    std::thread::sleep(Duration::from_micros(50));
                }
                continue;
            };
            idle = 0;
            match task {
                Task::Spec(c, depth) => self.speculate(c, depth, &mut free),
                _ => {
                    self.needed(task, &deque, &mut free, &mut oom_epoch);
                    self.pending.fetch_sub(1, SeqCst);
                }
            }
        }
        self.pool.put_shard(w, free);
    }

    fn find(&self, w: usize, deque: &Worker<Task>, rng: &mut StdRng) -> Option<Task> {
        if let Some(t) = deque.pop() {
            return Some(t);
        }
        let n = self.stealers.len();
        let start = rng.gen_range(0..n);
        for k in 0..n {
            let v = (start + k) % n;
            if v == w {
                continue;
            }
            loop {
                match self.stealers[v].steal() {
                    Steal::Success(t) => return Some(t),
                    Steal::Retry => continue,
                    Steal::Empty => break,
                }
            }
        }
        if self.cfg.speculation {
            loop {
                match self.speculative.steal() {
                    Steal::Success(t) => return Some(t),
                    Steal::Retry => continue,
                    Steal::Empty => break,
                }
            }
        }
        None
    }

    /// Stop-the-world rendezvous around a recycle pass.
    fn pause(&self, w: usize, deque: &Worker<Task>, free: &mut Vec<u32>) {
        self.pool.put_shard(w, std::mem::take(free));
        let mine: Vec<Task> = std::iter::from_fn(|| deque.pop()).collect();
        self.parked.lock().expect("parked lock")[w] = mine;
        if self.barrier.wait().is_leader() {
            self.observer.quiescent(self.pool, None);
            let freed = self.pool.recycle_paused();
            self.observer.quiescent(self.pool, Some(&freed));
            // Tasks on freed cells must go before the cells are reused.
            let alive = |t: &Task| self.pool.get(t.cell()).is_alive();
            for tasks in self.parked.lock().expect("parked lock").iter_mut() {
                let dropped = tasks
                    .iter()
                    .filter(|t| !alive(t) && !matches!(t, Task::Spec(..)))
                    .count();
                tasks.retain(alive);
                self.pending.fetch_sub(dropped as i64, SeqCst);
            }
            let spec: Vec<Task> = std::iter::from_fn(|| loop {
                match self.speculative.steal() {
                    Steal::Success(t) => return Some(t),
                    Steal::Retry => continue,
                    Steal::Empty => return None,
                }
            })
            .collect();
            for t in spec.into_iter().filter(alive) {
                self.speculative.push(t);
            }
            self.recycles.fetch_add(1, SeqCst);
            self.allocated_since_recycle.store(0, SeqCst);
            self.state.store(RUNNING, SeqCst);
        }
        self.barrier.wait();
        *free = self.pool.take_shard(w);
        let mine = std::mem::take(&mut self.parked.lock().expect("parked lock")[w]);
        for t in mine.into_iter().rev() {
            deque.push(t);
        }
    }

    fn needed(
        &self,
        task: Task,
        deque: &Worker<Task>,
        free: &mut Vec<u32>,
        oom_epoch: &mut Option<u64>,
    ) {
        let c = task.cell();
        let s = self.pool.get(c);
        if !s.is_alive() || s.flags & FLAG_NF != 0 {
            return;
        }
        match check_cell(self.pool, c) {
            Err(_) | Ok(CheckOutcome::SetNF) => {}
            Ok(CheckOutcome::Pending) => {
                self.push(deque, task);
                if s.is_node() {
                    self.push(deque, Task::Head(s.left()));
                }
            }
            Ok(CheckOutcome::SetHNF | CheckOutcome::Stuck) => {
                if let Task::Norm(_) = task {
                    self.push(deque, task);
                    for child in [s.right(), s.left()] {
                        if self.pool.get(child).flags & FLAG_NF == 0 {
                            self.push(deque, Task::Norm(child));
                        }
                    }
                }
            }
            Ok(CheckOutcome::Reducible) => {
                if self.reductions.load(SeqCst) >= self.cfg.fuel {
                    self.push(deque, task);
                    self.stop(Stop::Fuel);
                    return;
                }
                match reduce_cell(self.pool, c, free) {
                    Ok(ReduceOutcome::Rewritten { new_cells }) => {
                        *oom_epoch = None;
                        self.push(deque, task);
                        self.rewritten(c, &new_cells, 0);
                    }
                    Ok(ReduceOutcome::Pending { operands }) => {
                        self.push(deque, task);
                        for o in operands.into_iter().rev() {
                            if self.pool.get(o).flags & FLAG_HNF == 0 {
                                self.push(deque, Task::Head(o));
                            }
                        }
                    }
                    Ok(ReduceOutcome::Raced) => self.push(deque, task),
                    Err(VmError::OutOfMemory) => {
                        self.push(deque, task);
                        let epoch = self.recycles.load(SeqCst);
                        match *oom_epoch {
                            Some(e) if epoch > e => self.stop(Stop::Error(VmError::OutOfMemory)),
                            _ => {
                                *oom_epoch = Some(epoch);
                                self.request_pause();
                            }
                        }
                    }
                    Err(e) => self.stop(Stop::Error(e)),
                }
            }
        }
    }

    /// Bookkeeping after a successful rewrite of `c` at speculation depth
    /// `depth`.
    fn rewritten(&self, c: u32, new_cells: &[u32], depth: u8) {
        self.reductions.fetch_add(1, SeqCst);
        let n = new_cells.len() as u64;
        self.allocations.fetch_add(n, SeqCst);
        let since = self.allocated_since_recycle.fetch_add(n, SeqCst) + n;
        if self.pool.live_cells() >= self.threshold && since >= (self.threshold / 4).max(1) {
            self.request_pause();
        }
        if self.cfg.speculation && depth < SPECULATION_DEPTH {
            if depth > 0 {
                self.speculative.push(Task::Spec(c, depth + 1));
            }
            for &n in new_cells {
                self.speculative.push(Task::Spec(n, depth + 1));
            }
        }
    }

    /// One reduction nobody has asked for. Failures are ignored: an error
    /// in a term that is never needed must not stop the program.
    fn speculate(&self, c: u32, depth: u8, free: &mut Vec<u32>) {
        if self.reductions.load(SeqCst) >= self.cfg.fuel {
            return;
        }
        let s = self.pool.get(c);
        if !s.is_alive() || s.flags & FLAG_NF != 0 {
            return;
        }
        if let Ok(CheckOutcome::Reducible) = check_cell(self.pool, c) {
            if let Ok(ReduceOutcome::Rewritten { new_cells }) = reduce_cell(self.pool, c, free) {
                self.rewritten(c, &new_cells, depth);
            }
        }
    }
}
