//! Values written in source come back unchanged after compilation,
//! reduction and readback.

use lambdam::oracle::{reduce_kvy, ReduceStatus};
use lambdam::pipeline::compile_source;
use lambdam::readback::{readback, render, Tables};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use testkit::corpus::list_literal;

const DATA: &str = "\
data List a = Nil | Cons a (List a)
data Tuple a b = Tuple a b
";

fn roundtrip(main: &str) -> String {
    let source = format!("{DATA}main = {main}\n");
    let c = compile_source(&source).unwrap();
    let r = reduce_kvy(&c.kvy, 1_000_000).unwrap();
    assert_eq!(r.status, ReduceStatus::NormalForm);
    let ty = c.program.entry_scheme().ty.clone();
    render(&readback(&r.term, &ty, Tables::of(&c.program)).unwrap())
}

fn bool_name(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

#[test]
fn nat_lists() {
    let mut rng = StdRng::seed_from_u64(0x11);
    for _ in 0..50 {
        let len = rng.gen_range(0..6);
        let list: Vec<u64> = (0..len).map(|_| rng.gen_range(0..6)).collect();
        // Annotate through a constructor so the element type is Nat.
        let source = format!("(Cons Z ({}))", list_literal(&list));
        let mut expected = vec![0];
        expected.extend(&list);
        let rendered = list_literal(&expected).replace("(Nil)", "Nil");
        assert_eq!(roundtrip(&source), rendered);
    }
}

#[test]
fn booleans() {
    let mut rng = StdRng::seed_from_u64(0x12);
    for _ in 0..50 {
        let b: bool = rng.gen();
        assert_eq!(roundtrip(bool_name(b)), bool_name(b));
    }
}

#[test]
fn tuples_of_nat_and_bool() {
    let mut rng = StdRng::seed_from_u64(0x13);
    for _ in 0..50 {
        let (n, b): (u64, bool) = (rng.gen_range(0..20), rng.gen());
        let source = format!("Tuple (S {n}) {}", bool_name(b));
        assert_eq!(
            roundtrip(&source),
            format!("Tuple {} {}", n + 1, bool_name(b))
        );
    }
}
