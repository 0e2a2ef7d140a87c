//! Whole programs on the machine, compared with the sequential reducer.

mod common;

use std::time::{Duration, Instant};

use common::{compile, config, run_oracle, run_vm, CAPACITY};
use lambdam::kvy::{emit_image, parse_kvy};
use matrima::{run, Outcome, Pool, RunConfig, VmError};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use testkit::{corpus, gen};

#[test]
fn plus_one_one_on_every_schedule() {
    let c = compile(corpus::PLUS);
    let mut images = Vec::new();
    for workers in [1, 2, 4, 8] {
        for seed in 0..5 {
            let started = Instant::now();
            let r = run_vm(&c, &config(workers, seed), CAPACITY, None);
            assert!(started.elapsed() < Duration::from_secs(5));
            assert_eq!(r.rendered, "2");
            images.push(r.image);
        }
    }
    assert!(images.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn corpus_results() {
    for (source, expected) in [
        (corpus::fac(5), "120".to_string()),
        (corpus::even(10), "True".to_string()),
        (
            corpus::remove(&[4, 1, 4, 2], 4),
            corpus::remove_expected(&[4, 1, 4, 2], 4),
        ),
    ] {
        let c = compile(&source);
        for workers in [1, 3] {
            assert_eq!(
                run_vm(&c, &config(workers, 7), CAPACITY, None).rendered,
                expected
            );
        }
    }
}

#[test]
fn remove_on_random_lists() {
    let mut rng = StdRng::seed_from_u64(0x4e30);
    for i in 0..30 {
        let len = rng.gen_range(0..6);
        let list: Vec<u64> = (0..len).map(|_| rng.gen_range(0..4)).collect();
        let ele = rng.gen_range(0..4);
        let c = compile(&corpus::remove(&list, ele));
        let vm = run_vm(&c, &config(1 + i % 4, i as u64), CAPACITY, None).rendered;
        assert_eq!(vm, corpus::remove_expected(&list, ele));
        assert_eq!(vm, run_oracle(&c));
    }
}

#[test]
fn random_programs_match_the_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0e);
    for i in 0..100 {
        let p = gen::program(&mut rng, 3, 4);
        let c = compile(&p.source);
        let vm = run_vm(&c, &config(1 + i % 4, i as u64), CAPACITY, None).rendered;
        assert_eq!(vm, run_oracle(&c), "program {i}:\n{}", p.source);
    }
}

#[test]
fn leaf_root_is_done_without_reductions() {
    let mut pool = Pool::new(16, 1).unwrap();
    let mut h = pool
        .load_process(&emit_image(&parse_kvy("K").unwrap()).unwrap())
        .unwrap();
    let out = run(&mut pool, &mut h, &RunConfig::default());
    assert!(matches!(out, Outcome::Done(ref img) if img.cells.len() == 1));
    assert_eq!(h.stats.reductions, 0);
}

#[test]
fn division_by_zero_is_reported() {
    let c = compile("main = #div 7 (#sub 2 2)\n");
    let mut pool = Pool::new(1024, 2).unwrap();
    let mut h = pool.load_process(&emit_image(&c.kvy).unwrap()).unwrap();
    let out = run(&mut pool, &mut h, &config(2, 0));
    assert_eq!(out, Outcome::Error(VmError::DivisionByZero));
}

#[test]
fn tiny_pool_runs_out_of_memory() {
    let c = compile(&corpus::fac(5));
    let img = emit_image(&c.kvy).unwrap();
    let mut pool = Pool::new(img.cells.len() as u64 + 8, 1).unwrap();
    let mut h = pool.load_process(&img).unwrap();
    let out = run(&mut pool, &mut h, &config(1, 0));
    assert_eq!(out, Outcome::Error(VmError::OutOfMemory));
}

#[test]
fn fuel_limit_stops_the_run() {
    let c = compile(&corpus::fac(5));
    let mut pool = Pool::new(CAPACITY, 1).unwrap();
    let mut h = pool.load_process(&emit_image(&c.kvy).unwrap()).unwrap();
    let cfg = RunConfig {
        fuel: 50,
        ..config(1, 0)
    };
    assert_eq!(run(&mut pool, &mut h, &cfg), Outcome::FuelExhausted);
}

#[test]
fn recycling_keeps_long_runs_in_a_small_pool() {
    let c = compile(&corpus::fac(5));
    let cells = emit_image(&c.kvy).unwrap().cells.len() as u64;
    for workers in [1, 4] {
        let r = run_vm(&c, &config(workers, 3), cells * 20, None);
        assert_eq!(r.rendered, "120");
        assert!(r.stats.recycle_passes > 0);
    }
}
