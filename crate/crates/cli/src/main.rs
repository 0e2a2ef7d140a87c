//! `lambdam`: check, compile and run LambdaM programs.

mod exec;
mod repl;

use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lambdam::kvy::{emit_image, image_to_term, load_image, print_kvy, serialize_image};
use lambdam::pipeline::{check_file, compile, Compiled};
use lambdam::syntax::default_search_paths;

use exec::{Failure, MachineOptions, EXIT_DIAGNOSTICS};

#[derive(Parser)]
#[command(
    name = "lambdam",
    version,
    about = "LambdaM compiler and Matrima machine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, type-check and coverage-check programs.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compile a program to KVY text, a cell image or core lambda terms.
    Compile {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Kvy)]
        emit: Emit,
        /// Output path; defaults to the input with the matching extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a program (or a `.mtrm` image) on the parallel machine.
    Run {
        input: PathBuf,
        #[command(flatten)]
        machine: MachineArgs,
        /// Write run statistics as JSON to this file.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Evaluate a program with the sequential reference reducer.
    OracleRun {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        fuel: u64,
    },
    /// Interactive session.
    Repl {
        #[command(flatten)]
        machine: MachineArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Kvy,
    Mtrm,
    Core,
}

impl Emit {
    fn extension(self) -> &'static str {
        match self {
            Emit::Kvy => "kvy",
            Emit::Mtrm => "mtrm",
            Emit::Core => "core",
        }
    }
}

#[derive(Args, Clone)]
struct MachineArgs {
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Cells in the pool.
    #[arg(long, default_value_t = 1 << 22)]
    heap_cells: u64,
    /// Reductions allowed before giving up.
    #[arg(long, default_value_t = 10_000_000)]
    fuel: u64,
    /// Perturbs work stealing; random when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

impl MachineArgs {
    fn options(&self) -> MachineOptions {
        let threads = self.threads.map_or_else(
            || std::thread::available_parallelism().map_or(1, |n| n.get()),
            |n| n as usize,
        );
        let seed = self
            .seed
            .unwrap_or_else(|| RandomState::new().build_hasher().finish());
        MachineOptions {
            threads,
            heap_cells: self.heap_cells,
            fuel: self.fuel,
            seed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { files } => cmd_check(&files),
        Command::Compile { file, emit, output } => cmd_compile(&file, emit, output.as_deref()),
        Command::Run {
            input,
            machine,
            stats,
        } => cmd_run(&input, &machine.options(), stats.as_deref()),
        Command::OracleRun { file, fuel } => cmd_oracle_run(&file, fuel),
        Command::Repl { machine } => repl::run(machine.options()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code as u8)
        }
    }
}

fn load(file: &Path) -> Result<Compiled, Failure> {
    Ok(compile(check_file(file, &default_search_paths())?)?)
}

fn cmd_check(files: &[PathBuf]) -> Result<(), Failure> {
    let mut failed = false;
    for file in files {
        match check_file(file, &default_search_paths()) {
            Ok(_) => println!("{}: ok", file.display()),
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    if failed {
        Err(Failure::new(EXIT_DIAGNOSTICS, "checking failed"))
    } else {
        Ok(())
    }
}

fn cmd_compile(file: &Path, emit: Emit, output: Option<&Path>) -> Result<(), Failure> {
    let c = load(file)?;
    let bytes = match emit {
        Emit::Kvy => (print_kvy(&c.kvy) + "\n").into_bytes(),
        Emit::Core => format!("{}\n", c.core).into_bytes(),
        Emit::Mtrm => {
            let img =
                emit_image(&c.kvy).map_err(|e| Failure::new(EXIT_DIAGNOSTICS, e.to_string()))?;
            serialize_image(&img)
        }
    };
    let out = output.map_or_else(|| file.with_extension(emit.extension()), Path::to_path_buf);
    fs::write(&out, bytes)
        .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("{}: {e}", out.display())))?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_run(input: &Path, opts: &MachineOptions, stats: Option<&Path>) -> Result<(), Failure> {
    let is_image = input.extension().is_some_and(|e| e == "mtrm");
    let (result, run_stats) = if is_image {
        let bytes = fs::read(input)
            .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("{}: {e}", input.display())))?;
        let img = load_image(&bytes)
            .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("{}: {e}", input.display())))?;
        let (result, run_stats) = exec::run_image(&img, opts);
        let printed = result.and_then(|img| {
            image_to_term(&img)
                .map(|t| print_kvy(&t))
                .map_err(|e| Failure::new(exec::EXIT_RUNTIME, e.to_string()))
        });
        (printed, run_stats)
    } else {
        exec::run_compiled(&load(input)?, opts)
    };
    if let Some(path) = stats {
        let status = match &result {
            Ok(_) => "done".to_string(),
            Err(f) => f.message.clone(),
        };
        exec::write_stats(path, &run_stats, opts, &status)?;
    }
    println!("{}", result?);
    Ok(())
}

fn cmd_oracle_run(file: &Path, fuel: u64) -> Result<(), Failure> {
    let c = load(file)?;
    println!("{}", exec::run_oracle(&c, fuel)?);
    Ok(())
}
