//! Every terminating reduction order reaches the same normal form.

use lambdam::oracle::{reduce_kvy, reduce_kvy_with, ReduceStatus, Strategy};
use lambdam::pipeline::compile_source;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use testkit::gen;
use testkit::terms::kvy_term;

const FUEL: u64 = 50_000;

#[test]
fn random_orders_agree_on_random_terms() {
    let mut rng = StdRng::seed_from_u64(0xc0f1);
    let mut compared = 0;
    for _ in 0..500 {
        let t = kvy_term(&mut rng, 6, false);
        let Ok(reference) = reduce_kvy(&t, FUEL) else {
            continue;
        };
        if reference.status == ReduceStatus::FuelExhausted {
            continue;
        }
        let mut choice = StdRng::seed_from_u64(rng.gen());
        let mut choose = |n: usize| choice.gen_range(0..n);
        let other = reduce_kvy_with(&t, FUEL, Strategy::Choose(&mut choose)).unwrap();
        if other.status == ReduceStatus::FuelExhausted {
            continue;
        }
        assert_eq!(other.term, reference.term, "term: {t}");
        compared += 1;
    }
    assert!(compared >= 400, "only {compared} terms normalized");
}

#[test]
fn random_orders_agree_on_compiled_programs() {
    let mut rng = StdRng::seed_from_u64(0xc0f2);
    for _ in 0..30 {
        let p = gen::program(&mut rng, 2, 3);
        let kvy = compile_source(&p.source).unwrap().kvy;
        let reference = reduce_kvy(&kvy, 1_000_000).unwrap();
        assert_eq!(reference.status, ReduceStatus::NormalForm);
        let mut choice = StdRng::seed_from_u64(rng.gen());
        // Prefer outer redexes so that the run terminates like normal order
        // does, while still picking inner ones often.
        let mut choose = |n: usize| {
            if choice.gen_bool(0.7) {
                0
            } else {
                choice.gen_range(0..n)
            }
        };
        let other = reduce_kvy_with(&kvy, 5_000_000, Strategy::Choose(&mut choose)).unwrap();
        if other.status == ReduceStatus::NormalForm {
            assert_eq!(other.term, reference.term, "{}", p.source);
        }
    }
}
