//! Invariants checked while every worker is paused for recycling.

mod common;

use std::collections::BTreeSet;
use std::sync::Mutex;

use common::{compile, config, run_oracle, run_vm};
use lambdam::kvy::{emit_image, parse_kvy, Cell, CellImage, LeafKind};
use matrima::{audit_checker, audit_refcounts, unreachable_alive, Observer, Pool, RunConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use testkit::{corpus, gen};

#[derive(Default)]
struct Auditor {
    /// Unreachable cells seen before the pass in progress.
    expected_free: Mutex<Option<BTreeSet<u32>>>,
    pauses: Mutex<u64>,
    failures: Mutex<Vec<String>>,
}

impl Auditor {
    fn fail(&self, msg: String) {
        self.failures.lock().unwrap().push(msg);
    }
}

impl Observer for Auditor {
    fn quiescent(&self, pool: &Pool, freed: Option<&[u32]>) {
        let refs = audit_refcounts(pool);
        if !refs.is_empty() {
            self.fail(format!(
                "refcount mismatches: {:?}",
                &refs[..refs.len().min(5)]
            ));
        }
        let checker = audit_checker(pool);
        if !checker.is_empty() {
            self.fail(format!(
                "checker violations: {:?}",
                &checker[..checker.len().min(5)]
            ));
        }
        match freed {
            None => {
                *self.pauses.lock().unwrap() += 1;
                *self.expected_free.lock().unwrap() = Some(unreachable_alive(pool));
            }
            Some(freed) => {
                let expected = self
                    .expected_free
                    .lock()
                    .unwrap()
                    .take()
                    .unwrap_or_default();
                let got: BTreeSet<u32> = freed.iter().copied().collect();
                if got.len() != freed.len() {
                    self.fail("a cell was freed twice".into());
                }
                if got != expected {
                    self.fail(format!(
                        "freed {} cells, {} were unreachable",
                        got.len(),
                        expected.len()
                    ));
                }
                if !unreachable_alive(pool).is_empty() {
                    self.fail("unreachable cells survived recycling".into());
                }
            }
        }
    }
}

#[test]
fn invariants_hold_at_every_forced_pause() {
    let mut rng = StdRng::seed_from_u64(0xa0d1);
    let mut total_pauses = 0;
    for i in 0..50 {
        let source = match i % 5 {
            0 => corpus::fac(4),
            1 => corpus::even(9),
            _ => gen::program(&mut rng, 3, 4).source,
        };
        let c = compile(&source);
        let cells = emit_image(&c.kvy).unwrap().cells.len() as u64;
        let cfg = RunConfig {
            recycle_threshold: cells + rng.gen_range(4..64),
            ..config(rng.gen_range(1..=4), rng.gen())
        };
        let auditor = Auditor::default();
        let r = run_vm(&c, &cfg, 1 << 18, Some(&auditor));
        assert_eq!(r.rendered, run_oracle(&c), "{source}");
        let failures = auditor.failures.lock().unwrap();
        assert!(failures.is_empty(), "run {i}: {failures:?}\n{source}");
        total_pauses += *auditor.pauses.lock().unwrap();
    }
    assert!(total_pauses >= 50, "only {total_pauses} pauses");
}

#[test]
fn unreferenced_node_over_shared_leaves() {
    // Cell 0 is the root (K Y); cell 3 is a second node over the same two
    // leaves that nothing points to.
    let img = CellImage {
        cells: vec![
            Cell::node(1, 2),
            Cell::leaf(LeafKind::K, 0),
            Cell::leaf(LeafKind::Y, 0),
            Cell::node(1, 2),
        ],
        root: 0,
    };
    let mut pool = Pool::new(16, 1).unwrap();
    let h = pool.load_process(&img).unwrap();
    let (k, y) = (pool.get(h.root).left(), pool.get(h.root).right());
    assert_eq!((pool.get(k).refcount, pool.get(y).refcount), (18, 18));
    let garbage = unreachable_alive(&pool);
    assert_eq!(garbage.len(), 1);
    assert_eq!(pool.recycle(), 1);
    assert_eq!((pool.get(k).refcount, pool.get(y).refcount), (17, 17));
    assert!(audit_refcounts(&pool).is_empty());
}

#[test]
fn released_process_is_freed_entirely() {
    let mut pool = Pool::new(16, 1).unwrap();
    let h = pool
        .load_process(&emit_image(&parse_kvy("K K").unwrap()).unwrap())
        .unwrap();
    assert_eq!(pool.recycle(), 0);
    pool.release_process(&h);
    assert_eq!(pool.recycle(), 2);
    assert_eq!(pool.live_cells(), 0);
}

#[test]
fn recycle_frees_only_garbage() {
    let mut pool = Pool::new(64, 1).unwrap();
    let kept = pool
        .load_process(&emit_image(&parse_kvy("K (V< K)").unwrap()).unwrap())
        .unwrap();
    let dropped = pool
        .load_process(&emit_image(&parse_kvy("(K K) K").unwrap()).unwrap())
        .unwrap();
    assert_eq!(pool.recycle(), 0);
    pool.release_process(&dropped);
    let garbage = unreachable_alive(&pool);
    let before = pool.live_cells();
    assert_eq!(pool.recycle(), garbage.len() as u64);
    assert_eq!(pool.live_cells(), before - garbage.len() as u64);
    assert!(unreachable_alive(&pool).is_empty());
    assert!(audit_refcounts(&pool).is_empty());
    assert!(pool.get(kept.root).is_alive());
}
