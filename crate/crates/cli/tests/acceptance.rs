//! Acceptance suite: prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use lambdam::kvy::{
    compile_core, decode_path_bits, emit_image, encode_path_bits, image_to_term, load_image,
    parse_kvy, print_kvy, serialize_image, CellImage, KvyTerm,
};
use lambdam::lower::CoreTerm;
use lambdam::oracle::{reduce_core, reduce_kvy, v_composite, ReduceStatus};
use lambdam::pipeline::{compile_source, Compiled};
use lambdam::readback::{readback, render, Tables};
use matrima::{
    audit_checker, audit_refcounts, run, run_observed, unreachable_alive, Observer, Outcome, Pool,
    RunConfig, RunStats,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use testkit::terms::{all_paths, core_term, kvy_term, multipath, probe};
use testkit::{corpus, gen};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compile(source: &str) -> Result<Compiled, String> {
    compile_source(source).map_err(|e| format!("{e}\n{source}"))
}

fn config(workers: usize, seed: u64) -> RunConfig {
    RunConfig {
        workers,
        seed,
        ..RunConfig::default()
    }
}

fn read(c: &Compiled, t: &KvyTerm) -> Result<String, String> {
    let ty = &c.program.entry_scheme().ty;
    readback(t, ty, Tables::of(&c.program))
        .map(|v| render(&v))
        .map_err(|e| e.to_string())
}

fn vm(
    c: &Compiled,
    cfg: &RunConfig,
    capacity: u64,
    observer: Option<&dyn Observer>,
) -> Result<(String, CellImage, RunStats), String> {
    let mut pool = Pool::new(capacity, cfg.workers).map_err(|e| e.to_string())?;
    let img = emit_image(&c.kvy).map_err(|e| e.to_string())?;
    let mut h = pool.load_process(&img).map_err(|e| e.to_string())?;
    let outcome = match observer {
        Some(o) => run_observed(&mut pool, &mut h, cfg, o),
        None => run(&mut pool, &mut h, cfg),
    };
    let Outcome::Done(img) = outcome else {
        return Err(format!("machine run ended with {outcome:?}"));
    };
    let term = image_to_term(&img).map_err(|e| e.to_string())?;
    Ok((read(c, &term)?, img, h.stats))
}

fn oracle(c: &Compiled) -> Result<String, String> {
    let r = reduce_kvy(&c.kvy, 50_000_000).map_err(|e| e.to_string())?;
    ensure(r.status == ReduceStatus::NormalForm, || {
        format!("oracle ended with {:?}", r.status)
    })?;
    read(c, &r.term)
}

/// Images and reduction counts of the criterion-1 runs, shared with the
/// determinism criterion.
static PLUS_RUNS: Mutex<Vec<(Vec<u8>, u64)>> = Mutex::new(Vec::new());

fn plus_end_to_end() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = dir.path().join("plus.lm");
    std::fs::write(&file, corpus::PLUS).map_err(|e| e.to_string())?;
    let c = compile(corpus::PLUS)?;
    let mut slowest = Duration::ZERO;
    for threads in [1, 2, 4, 8] {
        for seed in 0..5u64 {
            let started = Instant::now();
            let out = Command::new(env!("CARGO_BIN_EXE_lambdam"))
                .args([
                    "run",
                    "--threads",
                    &threads.to_string(),
                    "--seed",
                    &seed.to_string(),
                ])
                .arg(&file)
                .output()
                .map_err(|e| e.to_string())?;
            let elapsed = started.elapsed();
            slowest = slowest.max(elapsed);
            let stdout = String::from_utf8_lossy(&out.stdout);
            ensure(out.status.success() && stdout == "2\n", || {
                format!(
                    "threads {threads} seed {seed}: printed {stdout:?}, {}",
                    out.status
                )
            })?;
            ensure(elapsed < Duration::from_secs(5), || {
                format!("threads {threads} seed {seed}: took {elapsed:?}")
            })?;
            let (value, img, stats) = vm(&c, &config(threads, seed), 1 << 22, None)?;
            ensure(value == "2", || format!("library run printed {value}"))?;
            PLUS_RUNS
                .lock()
                .unwrap()
                .push((serialize_image(&img), stats.reductions));
        }
    }
    Ok(format!("20 runs print 2; slowest {slowest:.2?}"))
}

fn reference_listing() -> Verdict {
    const LISTING: &str = "V<{{<>>>>>,},} (K V) V<< V<{>>,>}\nY (V<> V{><>,}) V<<> V><> (V>< K)";
    let c = compile(corpus::PLUS)?;
    let two = compile("main = S (S Z)\n")?;
    let scott_two = reduce_kvy(&two.kvy, 1000).map_err(|e| e.to_string())?.term;
    let listing = parse_kvy(LISTING).map_err(|e| format!("listing rejected: {e}"))?;
    let from_listing = reduce_kvy(&listing, 1_000_000).map_err(|e| e.to_string())?;
    ensure(from_listing.term == scott_two, || {
        format!("listing reduces to {}", print_kvy(&from_listing.term))
    })?;
    let ours = reduce_kvy(&c.kvy, 1_000_000).map_err(|e| e.to_string())?;
    ensure(ours.term == scott_two, || {
        format!("compiled plus reduces to {}", print_kvy(&ours.term))
    })?;
    ensure(read(&c, &ours.term)? == "2", || "readback is not 2".into())?;
    let same = print_kvy(&c.kvy) == print_kvy(&listing);
    Ok(format!(
        "listing parses and reduces to {} = S (S Z); own output {}",
        print_kvy(&scott_two),
        if same {
            "is identical"
        } else {
            "differs in shape, same normal form"
        }
    ))
}

fn v_examples() -> Verdict {
    let term = |s: &str| {
        let text: String = s
            .chars()
            .map(|c| match c {
                'a'..='h' => format!("#probe{}", c as u32 - 'a' as u32),
                'x' => "#probe9".to_string(),
                c => c.to_string(),
            })
            .collect();
        parse_kvy(&text).unwrap()
    };
    for (redex, target) in [
        ("V{>>>,<} a b c d x", "a (b (c x)) (x d)"),
        (
            "V{><,<<} (a b) (c d) (e f) (g h) x",
            "a b (x (c d)) (x (g h) (e f))",
        ),
    ] {
        let (t, expected) = (term(redex), term(target));
        let micro = reduce_kvy(&t, 100).map_err(|e| e.to_string())?.term;
        let (head, args) = t.spine();
        let KvyTerm::V(p) = head else {
            return Err("not a V redex".into());
        };
        let args: Vec<KvyTerm> = args.into_iter().cloned().collect();
        let (w, rest) = args.split_last().expect("arguments");
        let composite = v_composite(p, rest, w);
        let mut pool = Pool::new(256, 2).map_err(|e| e.to_string())?;
        let mut h = pool
            .load_process(&emit_image(&t).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let Outcome::Done(img) = run(&mut pool, &mut h, &config(2, 0)) else {
            return Err(format!("{redex}: machine did not finish"));
        };
        let machine = image_to_term(&img).map_err(|e| e.to_string())?;
        ensure(
            micro == expected && composite == expected && machine == expected,
            || {
                format!(
                    "{redex}: micro {}, composite {}, machine {}",
                    print_kvy(&micro),
                    print_kvy(&composite),
                    print_kvy(&machine)
                )
            },
        )?;
    }
    Ok("both examples identical three ways".into())
}

fn soundness() -> Verdict {
    const FUEL: u64 = 20_000;
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x50_0d);
    let (mut checked, mut drawn) = (0, 0);
    while checked < 1000 {
        drawn += 1;
        let depth = rng.gen_range(2..8);
        let body = core_term(&mut rng, depth, &mut vec!["x".to_string()]);
        let u = CoreTerm::Prim(probe(7));
        let substituted = body.subst("x", &u);
        match reduce_core(&substituted, FUEL) {
            Ok(r) if r.status != ReduceStatus::FuelExhausted => {}
            _ => continue,
        }
        let lam = compile_core(&CoreTerm::lam("x", body.clone())).map_err(|e| e.to_string())?;
        let applied = KvyTerm::app(lam, KvyTerm::Prim(probe(7)));
        let direct = compile_core(&substituted).map_err(|e| e.to_string())?;
        let (a, b) = (reduce_kvy(&applied, FUEL), reduce_kvy(&direct, FUEL));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                if a.status == ReduceStatus::FuelExhausted
                    || b.status == ReduceStatus::FuelExhausted
                {
                    continue;
                }
                ensure(a.term == b.term, || format!("differs for body {body}"))?;
            }
            (a, b) => ensure(a.is_err() == b.is_err(), || {
                format!("error mismatch for {body}")
            })?,
        }
        checked += 1;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("1000 terms equal ({drawn} drawn) in {elapsed:.2?}"))
}

fn vm_oracle_equivalence() -> Verdict {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xe9_0a);
    let mut programs: Vec<(String, Option<String>)> = vec![
        (corpus::PLUS.to_string(), Some("2".into())),
        (corpus::fac(5), Some("120".into())),
        (corpus::even(10), Some("True".into())),
    ];
    for _ in 0..30 {
        let len = rng.gen_range(0..8);
        let list: Vec<u64> = (0..len).map(|_| rng.gen_range(0..5)).collect();
        let ele = rng.gen_range(0..5);
        programs.push((
            corpus::remove(&list, ele),
            Some(corpus::remove_expected(&list, ele)),
        ));
    }
    for _ in 0..300 {
        programs.push((gen::program(&mut rng, 3, 4).source, None));
    }
    for (i, (source, expected)) in programs.iter().enumerate() {
        let c = compile(source)?;
        let (machine, _, _) = vm(&c, &config(1 + i % 4, i as u64), 1 << 20, None)?;
        let reference = oracle(&c)?;
        ensure(machine == reference, || {
            format!("machine {machine}, oracle {reference}:\n{source}")
        })?;
        if let Some(e) = expected {
            ensure(&machine == e, || {
                format!("expected {e}, got {machine}:\n{source}")
            })?;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} programs agree in {elapsed:.2?}",
        programs.len()
    ))
}

/// Records invariant violations seen while the workers are paused.
#[derive(Default)]
struct Auditor {
    expected_free: Mutex<Option<BTreeSet<u32>>>,
    pauses: Mutex<u64>,
    checker: Mutex<Vec<String>>,
    refcounts: Mutex<Vec<String>>,
    recycler: Mutex<Vec<String>>,
    checked_nodes: Mutex<u64>,
}

impl Observer for Auditor {
    fn quiescent(&self, pool: &Pool, freed: Option<&[u32]>) {
        for v in audit_checker(pool) {
            self.checker.lock().unwrap().push(format!("{v:?}"));
        }
        *self.checked_nodes.lock().unwrap() +=
            pool.alive_cells().filter(|(_, c)| c.is_node()).count() as u64;
        for m in audit_refcounts(pool) {
            self.refcounts.lock().unwrap().push(format!("{m:?}"));
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
                if got != expected || got.len() != freed.len() {
                    self.recycler.lock().unwrap().push(format!(
                        "freed {} cells, {} unreachable",
                        freed.len(),
                        expected.len()
                    ));
                }
            }
        }
    }
}

/// Fifty runs with a recycle threshold just above the program size, so
/// that the workers pause many times.
fn audited_runs() -> Result<Auditor, String> {
    let mut rng = StdRng::seed_from_u64(0xa0d17);
    let auditor = Auditor::default();
    for i in 0..50 {
        let source = match i % 5 {
            0 => corpus::fac(4),
            1 => corpus::even(9),
            _ => gen::program(&mut rng, 3, 4).source,
        };
        let c = compile(&source)?;
        let cells = emit_image(&c.kvy).map_err(|e| e.to_string())?.cells.len() as u64;
        let cfg = RunConfig {
            recycle_threshold: cells + rng.gen_range(4..64),
            ..config(rng.gen_range(1..=4), rng.gen())
        };
        let (machine, _, _) = vm(&c, &cfg, 1 << 18, Some(&auditor))?;
        let reference = oracle(&c)?;
        ensure(machine == reference, || {
            format!("machine {machine}, oracle {reference}")
        })?;
    }
    Ok(auditor)
}

static AUDIT: Mutex<Option<Result<Auditor, String>>> = Mutex::new(None);

fn with_audit<T>(f: impl FnOnce(&Auditor) -> Result<T, String>) -> Result<T, String> {
    let mut guard = AUDIT.lock().unwrap();
    if guard.is_none() {
        *guard = Some(audited_runs());
    }
    match guard.as_ref().expect("computed") {
        Ok(a) => f(a),
        Err(e) => Err(e.clone()),
    }
}

fn checker_audit() -> Verdict {
    with_audit(|a| {
        let pauses = *a.pauses.lock().unwrap();
        let violations = a.checker.lock().unwrap();
        ensure(pauses >= 50, || format!("only {pauses} pauses"))?;
        ensure(violations.is_empty(), || {
            format!(
                "{} violations: {:?}",
                violations.len(),
                &violations[..violations.len().min(3)]
            )
        })?;
        Ok(format!(
            "{pauses} pauses, {} node checks, 0 violations",
            a.checked_nodes.lock().unwrap()
        ))
    })
}

fn refcount_audit() -> Verdict {
    with_audit(|a| {
        let refs = a.refcounts.lock().unwrap();
        let recycler = a.recycler.lock().unwrap();
        ensure(refs.is_empty(), || {
            format!(
                "{} mismatches: {:?}",
                refs.len(),
                &refs[..refs.len().min(3)]
            )
        })?;
        ensure(recycler.is_empty(), || format!("{recycler:?}"))?;
        Ok(format!(
            "counts exact and freed = unreachable at {} pauses",
            a.pauses.lock().unwrap()
        ))
    })
}

fn format_roundtrips() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0xf0_4a);
    for _ in 0..200 {
        let t = kvy_term(&mut rng, 7, true);
        let img = emit_image(&t).map_err(|e| e.to_string())?;
        let bytes = serialize_image(&img);
        let back = load_image(&bytes).map_err(|e| e.to_string())?;
        ensure(serialize_image(&back) == bytes && back == img, || {
            format!("image of {} changed", print_kvy(&t))
        })?;
    }
    let short = all_paths(8);
    for p in &short {
        let word = encode_path_bits(p).map_err(|e| e.to_string())?;
        ensure(decode_path_bits(word).as_ref() == Ok(p), || {
            format!("path {p}")
        })?;
    }
    for _ in 0..10_000 {
        let p = multipath(&mut rng, 32);
        let word = encode_path_bits(&p).map_err(|e| e.to_string())?;
        ensure(decode_path_bits(word) == Ok(p.clone()), || {
            format!("path {p}")
        })?;
    }
    Ok(format!(
        "200 images, {} paths of <= 8 tokens, 10000 random paths",
        short.len()
    ))
}

fn determinism() -> Verdict {
    let runs = PLUS_RUNS.lock().unwrap();
    ensure(runs.len() == 20, || format!("{} runs recorded", runs.len()))?;
    ensure(runs.windows(2).all(|w| w[0].0 == w[1].0), || {
        "result images differ".into()
    })?;
    let counts: BTreeSet<u64> = runs.iter().map(|r| r.1).collect();
    Ok(format!(
        "20 identical images of {} bytes; reduction counts seen: {counts:?}",
        runs[0].0.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        (
            "plus 1 1 end to end on 4 thread counts x 5 seeds",
            plus_end_to_end,
        ),
        ("hand-written KVY listing for plus 1 1", reference_listing),
        (
            "V worked examples: micro steps, composite, machine",
            v_examples,
        ),
        ("abstraction elimination soundness", soundness),
        (
            "machine agrees with the sequential reducer",
            vm_oracle_equivalence,
        ),
        ("checker audit at quiescence", checker_audit),
        ("reference count and recycler audit", refcount_audit),
        ("image and path format roundtrips", format_roundtrips),
        ("deterministic results", determinism),
    ];
    // `ACCEPTANCE_ONLY=4,5` runs a subset of the criteria.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|n| n.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match verdict {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
