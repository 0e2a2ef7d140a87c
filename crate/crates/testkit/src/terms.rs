//! Random untyped terms and multipaths.

use lambdam::kvy::{KvyTerm, Multipath};
use lambdam::lower::CoreTerm;
use lambdam::prim::{PrimOp, PROBE_BASE};
use rand::seq::SliceRandom;
use rand::Rng;

/// An opaque atom that no rule rewrites.
pub fn probe(i: u32) -> u32 {
    PROBE_BASE + i
}

/// A random core term whose free variables are drawn from `scope`. Binder
/// names repeat on purpose so that shadowing is exercised.
pub fn core_term<R: Rng>(rng: &mut R, depth: u32, scope: &mut Vec<String>) -> CoreTerm {
    const BINDERS: [&str; 4] = ["y", "z", "w", "x"];
    if depth == 0 || rng.gen_bool(0.1) {
        return match rng.gen_range(0..10) {
            0 => CoreTerm::Int(rng.gen_range(0..5)),
            1 => CoreTerm::Prim(PrimOp::Add.id()),
            2 => CoreTerm::Prim(probe(rng.gen_range(0..3))),
            _ if !scope.is_empty() => CoreTerm::Var(scope.choose(rng).expect("non-empty").clone()),
            _ => CoreTerm::Prim(probe(rng.gen_range(0..3))),
        };
    }
    if rng.gen_bool(0.55) {
        let f = core_term(rng, depth - 1, scope);
        let a = core_term(rng, depth - 1, scope);
        CoreTerm::app(f, a)
    } else {
        let v = BINDERS.choose(rng).expect("binders").to_string();
        scope.push(v.clone());
        let body = core_term(rng, depth - 1, scope);
        scope.pop();
        CoreTerm::lam(&v, body)
    }
}

/// A random multipath with at most `max_tokens` tokens.
pub fn multipath<R: Rng>(rng: &mut R, max_tokens: usize) -> Multipath {
    let budget = rng.gen_range(1..=max_tokens.max(1));
    build_path(rng, budget)
}

fn build_path<R: Rng>(rng: &mut R, budget: usize) -> Multipath {
    if budget <= 1 {
        return Multipath::End;
    }
    match rng.gen_range(0..3) {
        0 => Multipath::left(build_path(rng, budget - 1)),
        1 => Multipath::right(build_path(rng, budget - 1)),
        _ if budget >= 3 => {
            let l = rng.gen_range(1..budget - 1);
            Multipath::fork(build_path(rng, l), build_path(rng, budget - 1 - l))
        }
        _ => Multipath::End,
    }
}

/// Every multipath with at most `max_tokens` tokens.
pub fn all_paths(max_tokens: usize) -> Vec<Multipath> {
    // by_size[n] holds the paths of exactly n tokens.
    let mut by_size: Vec<Vec<Multipath>> = vec![Vec::new(); max_tokens + 1];
    for n in 1..=max_tokens {
        let mut here = Vec::new();
        if n == 1 {
            here.push(Multipath::End);
        } else {
            for p in &by_size[n - 1] {
                here.push(Multipath::left(p.clone()));
                here.push(Multipath::right(p.clone()));
            }
            for l in 1..n - 1 {
                for a in &by_size[l] {
                    for b in &by_size[n - 1 - l] {
                        here.push(Multipath::fork(a.clone(), b.clone()));
                    }
                }
            }
        }
        by_size[n] = here;
    }
    by_size.into_iter().flatten().collect()
}

/// A random closed combinator term over `K`, `V`, integers and probes.
/// `Y` is included when `with_y` is set.
pub fn kvy_term<R: Rng>(rng: &mut R, depth: u32, with_y: bool) -> KvyTerm {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0..=2 => KvyTerm::K,
            3..=5 => KvyTerm::V(multipath(rng, 5)),
            6 => KvyTerm::Int(rng.gen_range(-3..10)),
            7 if with_y => KvyTerm::Y,
            _ => KvyTerm::Prim(probe(rng.gen_range(0..4))),
        };
    }
    KvyTerm::app(
        kvy_term(rng, depth - 1, with_y),
        kvy_term(rng, depth - 1, with_y),
    )
}
