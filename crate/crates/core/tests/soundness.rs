//! Abstraction elimination commutes with substitution: applying the
//! compiled abstraction to an atom gives the same normal form as
//! compiling the substituted body.

use lambdam::kvy::{compile_core, KvyTerm};
use lambdam::lower::CoreTerm;
use lambdam::oracle::{reduce_core, reduce_kvy, ReduceStatus};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use testkit::terms::{core_term, probe};

const FUEL: u64 = 20_000;

fn terminates(status: ReduceStatus) -> bool {
    status != ReduceStatus::FuelExhausted
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 1000,
        max_global_rejects: 100_000,
        ..ProptestConfig::default()
    })]

    #[test]
    fn abstraction_commutes_with_substitution(seed in any::<u64>(), depth in 2u32..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let body = core_term(&mut rng, depth, &mut vec!["x".to_string()]);
        let u = CoreTerm::Prim(probe(7));
        let substituted = body.subst("x", &u);
        let bounded = reduce_core(&substituted, FUEL);
        prop_assume!(matches!(&bounded, Ok(r) if terminates(r.status)));

        let abstracted = compile_core(&CoreTerm::lam("x", body.clone())).unwrap();
        let applied = KvyTerm::app(abstracted, KvyTerm::Prim(probe(7)));
        let direct = compile_core(&substituted).unwrap();
        let a = reduce_kvy(&applied, FUEL);
        let b = reduce_kvy(&direct, FUEL);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assume!(terminates(a.status) && terminates(b.status));
                prop_assert_eq!(a.term, b.term, "body: {}", body);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err(), "body: {}", body),
        }
    }
}
