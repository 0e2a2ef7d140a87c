//! The compiled program means what the source program means: for random
//! well-typed programs, the surface interpreter, the core reducer and the
//! combinator reducer all produce the same value.

use lambdam::oracle::{reduce_core, reduce_kvy, ReduceStatus};
use lambdam::pipeline::compile_source;
use lambdam::readback::{readback, readback_core, render, Tables};
use rand::rngs::StdRng;
use rand::SeedableRng;
use testkit::corpus;
use testkit::gen;
use testkit::interpret;

const FUEL: u64 = 5_000_000;

/// Rendered results of the three evaluators for one program.
fn evaluate(source: &str) -> (String, String, String) {
    let compiled = compile_source(source).unwrap_or_else(|e| panic!("{e}\n{source}"));
    let ty = compiled.program.entry_scheme().ty.clone();
    let tables = Tables::of(&compiled.program);
    let reference = interpret(&compiled.program, FUEL).unwrap_or_else(|e| panic!("{e}\n{source}"));
    let core = reduce_core(&compiled.core, FUEL).unwrap();
    assert_eq!(core.status, ReduceStatus::NormalForm, "{source}");
    let core = readback_core(&core.term, &ty, tables).unwrap_or_else(|e| panic!("{e}\n{source}"));
    let kvy = reduce_kvy(&compiled.kvy, FUEL).unwrap();
    assert_eq!(kvy.status, ReduceStatus::NormalForm, "{source}");
    let kvy = readback(&kvy.term, &ty, tables).unwrap_or_else(|e| panic!("{e}\n{source}"));
    (render(&reference), render(&core), render(&kvy))
}

#[test]
fn corpus_programs() {
    for (source, expected) in [
        (corpus::PLUS.to_string(), "2"),
        (corpus::fac(3), "6"),
        (corpus::even(4), "True"),
        (corpus::even(7), "False"),
        (corpus::remove(&[1, 2, 3], 2), "Cons 1 (Cons 3 Nil)"),
    ] {
        let (a, b, c) = evaluate(&source);
        assert_eq!(
            (a.as_str(), b.as_str(), c.as_str()),
            (expected, expected, expected)
        );
    }
}

#[test]
fn remove_agrees_with_direct_computation() {
    for (list, ele) in [
        (vec![], 1),
        (vec![2, 2], 2),
        (vec![0, 1, 0], 0),
        (vec![3, 1], 4),
    ] {
        let (_, _, kvy) = evaluate(&corpus::remove(&list, ele));
        assert_eq!(kvy, corpus::remove_expected(&list, ele));
    }
}

#[test]
fn random_programs_preserve_meaning() {
    let mut rng = StdRng::seed_from_u64(0x1a3b_da);
    for i in 0..200 {
        let p = gen::program(&mut rng, 3, 4);
        let (reference, core, kvy) = evaluate(&p.source);
        assert_eq!(
            reference, core,
            "program {i}, core disagrees:\n{}",
            p.source
        );
        assert_eq!(
            reference, kvy,
            "program {i}, combinators disagree:\n{}",
            p.source
        );
    }
}
