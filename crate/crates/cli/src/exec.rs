//! Running compiled programs and mapping failures to exit codes.

use std::fmt;
use std::fs;
use std::path::Path;

use lambdam::kvy::{emit_image, image_to_term, CellImage, KvyTerm};
use lambdam::oracle::{reduce_kvy, OracleError, ReduceStatus};
use lambdam::pipeline::{Compiled, PipelineError};
use lambdam::readback::{readback, render, ReadbackError, Tables};
use matrima::{run, Outcome, Pool, RunConfig, RunStats, VmError};
use serde_json::json;

pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_DIVISION_BY_ZERO: i32 = 3;
pub const EXIT_OUT_OF_MEMORY: i32 = 4;
pub const EXIT_FUEL: i32 = 5;
pub const EXIT_RUNTIME: i32 = 6;
pub const EXIT_READBACK: i32 = 7;

/// A failed command: what to print and which exit code to use.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: {}", self.message)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::new(EXIT_DIAGNOSTICS, e.to_string())
    }
}

impl From<VmError> for Failure {
    fn from(e: VmError) -> Self {
        let code = match e {
            VmError::DivisionByZero => EXIT_DIVISION_BY_ZERO,
            VmError::OutOfMemory => EXIT_OUT_OF_MEMORY,
            VmError::CapacityTooLarge { .. } | VmError::BadImage(_) => EXIT_DIAGNOSTICS,
            _ => EXIT_RUNTIME,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::DivisionByZero => EXIT_DIVISION_BY_ZERO,
            OracleError::PrimTypeError { .. } => EXIT_RUNTIME,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ReadbackError> for Failure {
    fn from(e: ReadbackError) -> Self {
        Failure::new(EXIT_READBACK, format!("cannot read back the result: {e}"))
    }
}

/// Machine settings shared by `run` and the REPL.
#[derive(Clone, Debug)]
pub struct MachineOptions {
    pub threads: usize,
    pub heap_cells: u64,
    pub fuel: u64,
    pub seed: u64,
}

impl MachineOptions {
    fn config(&self) -> RunConfig {
        RunConfig {
            workers: self.threads,
            fuel: self.fuel,
            seed: self.seed,
            ..RunConfig::default()
        }
    }
}

/// Loads an image into a fresh pool and runs it to normal form.
pub fn run_image(img: &CellImage, opts: &MachineOptions) -> (Result<CellImage, Failure>, RunStats) {
    let mut pool = match Pool::new(opts.heap_cells, opts.threads) {
        Ok(p) => p,
        Err(e) => return (Err(e.into()), RunStats::default()),
    };
    let mut h = match pool.load_process(img) {
        Ok(h) => h,
        Err(e) => return (Err(e.into()), RunStats::default()),
    };
    let outcome = match run(&mut pool, &mut h, &opts.config()) {
        Outcome::Done(img) => Ok(img),
        Outcome::Error(e) => Err(e.into()),
        Outcome::FuelExhausted => Err(Failure::new(
            EXIT_FUEL,
            format!("fuel exhausted after {} reductions", opts.fuel),
        )),
    };
    (outcome, h.stats)
}

/// Runs a compiled program on the machine and renders its value.
pub fn run_compiled(c: &Compiled, opts: &MachineOptions) -> (Result<String, Failure>, RunStats) {
    let img = match emit_image(&c.kvy) {
        Ok(img) => img,
        Err(e) => return (Err(PipelineError::from(e).into()), RunStats::default()),
    };
    let (result, stats) = run_image(&img, opts);
    let rendered = result.and_then(|img| {
        let term = image_to_term(&img).map_err(|e| Failure::new(EXIT_RUNTIME, e.to_string()))?;
        render_value(c, &term)
    });
    (rendered, stats)
}

fn render_value(c: &Compiled, term: &KvyTerm) -> Result<String, Failure> {
    let ty = &c.program.entry_scheme().ty;
    Ok(render(&readback(term, ty, Tables::of(&c.program))?))
}

/// Runs a compiled program on the sequential reducer.
pub fn run_oracle(c: &Compiled, fuel: u64) -> Result<String, Failure> {
    let r = reduce_kvy(&c.kvy, fuel)?;
    match r.status {
        ReduceStatus::NormalForm => render_value(c, &r.term),
        ReduceStatus::FuelExhausted => Err(Failure::new(
            EXIT_FUEL,
            format!("fuel exhausted after {fuel} steps"),
        )),
        ReduceStatus::Stuck => Err(Failure::new(
            EXIT_RUNTIME,
            "a primitive is applied to a non-integer",
        )),
    }
}

/// Writes run statistics as a JSON object.
pub fn write_stats(
    path: &Path,
    stats: &RunStats,
    opts: &MachineOptions,
    status: &str,
) -> Result<(), Failure> {
    let value = json!({
        "status": status,
        "threads": opts.threads,
        "seed": opts.seed,
        "reductions": stats.reductions,
        "allocations": stats.allocations,
        "recyclePasses": stats.recycle_passes,
        "peakLiveCells": stats.peak_live_cells,
        "refcountSaturations": stats.refcount_saturations,
        "elapsedMs": stats.elapsed.as_secs_f64() * 1000.0,
    });
    let text = serde_json::to_string_pretty(&value).expect("JSON value");
    fs::write(path, text + "\n")
        .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("{}: {e}", path.display())))
}
