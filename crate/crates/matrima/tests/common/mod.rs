#![allow(dead_code)]

use lambdam::kvy::{emit_image, image_to_term, serialize_image, CellImage};
use lambdam::oracle::{reduce_kvy, ReduceStatus};
use lambdam::pipeline::{compile_source, Compiled};
use lambdam::readback::{readback, render, Tables};
use matrima::{run, run_observed, Observer, Outcome, Pool, RunConfig, RunStats};

pub const CAPACITY: u64 = 1 << 20;

pub struct VmResult {
    pub rendered: String,
    pub image: Vec<u8>,
    pub stats: RunStats,
}

pub fn config(workers: usize, seed: u64) -> RunConfig {
    RunConfig {
        workers,
        seed,
        ..RunConfig::default()
    }
}

pub fn compile(source: &str) -> Compiled {
    compile_source(source).unwrap_or_else(|e| panic!("{e}\n{source}"))
}

fn read(c: &Compiled, img: &CellImage) -> String {
    let term = image_to_term(img).unwrap();
    let ty = c.program.entry_scheme().ty.clone();
    render(&readback(&term, &ty, Tables::of(&c.program)).unwrap())
}

pub fn run_vm(
    c: &Compiled,
    cfg: &RunConfig,
    capacity: u64,
    observer: Option<&dyn Observer>,
) -> VmResult {
    let mut pool = Pool::new(capacity, cfg.workers).unwrap();
    let mut h = pool.load_process(&emit_image(&c.kvy).unwrap()).unwrap();
    let outcome = match observer {
        Some(o) => run_observed(&mut pool, &mut h, cfg, o),
        None => run(&mut pool, &mut h, cfg),
    };
    let Outcome::Done(img) = outcome else {
        panic!("run ended with {outcome:?}");
    };
    VmResult {
        rendered: read(c, &img),
        image: serialize_image(&img),
        stats: h.stats,
    }
}

pub fn run_oracle(c: &Compiled) -> String {
    let r = reduce_kvy(&c.kvy, 50_000_000).unwrap();
    assert_eq!(r.status, ReduceStatus::NormalForm);
    let ty = c.program.entry_scheme().ty.clone();
    render(&readback(&r.term, &ty, Tables::of(&c.program)).unwrap())
}
