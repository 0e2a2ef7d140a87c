//! The single-step V rules and the one-shot construction agree.

use lambdam::kvy::{parse_kvy, KvyTerm};
use lambdam::oracle::{reduce_kvy, v_composite, ReduceStatus};
use testkit::terms::{all_paths, probe};

fn atoms(n: usize, from: u32) -> Vec<KvyTerm> {
    (0..n as u32)
        .map(|i| KvyTerm::Prim(probe(from + i)))
        .collect()
}

#[test]
fn micro_steps_equal_composite_for_short_paths() {
    let paths = all_paths(5);
    assert!(paths.len() > 50);
    for p in paths {
        let args = atoms(p.degree(), 0);
        let w = KvyTerm::Prim(probe(100));
        let saturated = KvyTerm::apps(
            KvyTerm::V(p.clone()),
            args.iter().cloned().chain([w.clone()]),
        );
        let r = reduce_kvy(&saturated, 1000).unwrap();
        assert_eq!(r.status, ReduceStatus::NormalForm);
        assert_eq!(r.term, v_composite(&p, &args, &w), "path {p}");
    }
}

/// Names `a`..`h` stand for probes 0..7 and `x` for probe 9.
fn term(s: &str) -> KvyTerm {
    let text: String = s
        .chars()
        .map(|c| match c {
            'a'..='h' => format!("#probe{}", c as u32 - 'a' as u32),
            'x' => "#probe9".to_string(),
            c => c.to_string(),
        })
        .collect();
    parse_kvy(&text).unwrap()
}

#[test]
fn worked_examples() {
    for (redex, expected) in [
        ("V{>>>,<} a b c d x", "a (b (c x)) (x d)"),
        (
            "V{><,<<} (a b) (c d) (e f) (g h) x",
            "a b (x (c d)) (x (g h) (e f))",
        ),
    ] {
        let redex = term(redex);
        let expected = term(expected);
        let micro = reduce_kvy(&redex, 100).unwrap().term;
        let (head, args) = redex.spine();
        let KvyTerm::V(p) = head else { unreachable!() };
        let args: Vec<KvyTerm> = args.into_iter().cloned().collect();
        let (w, rest) = args.split_last().unwrap();
        assert_eq!(micro, expected);
        assert_eq!(v_composite(p, rest, w), expected);
    }
}
