//! The interactive session.

use std::io::{self, BufRead, IsTerminal, Write};
use std::path::Path;

use lambdam::pipeline::{check, compile, with_entry_expr, PipelineError};
use lambdam::syntax::{default_search_paths, load_program, load_source, SurfaceProgram};
use lambdam::typecheck::{display_types, TypedProgram};

use crate::exec::{self, Failure, MachineOptions};

const INPUT: &str = "<repl>";

const HELP: &str = "\
commands:
  :load FILE, :l FILE     load a program
  :type EXPR, :t EXPR     show the type of an expression
  :display t, :d t        show the types of the loaded top-level names
  :quit, :q               leave
  EXPR                    evaluate an expression on the machine";

struct Session {
    opts: MachineOptions,
    /// The program expressions are evaluated against.
    base: SurfaceProgram,
    loaded: Option<TypedProgram>,
}

pub fn run(opts: MachineOptions) -> Result<(), Failure> {
    let base = load_source(INPUT, "main = True\n", &[]).expect("prelude-only program loads");
    let mut session = Session {
        opts,
        base,
        loaded: None,
    };
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            print!("λ> ");
            io::stdout().flush().ok();
        }
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| Failure::new(exec::EXIT_DIAGNOSTICS, e.to_string()))?;
        match session.command(line.trim()) {
            Ok(Step::Continue) => {}
            Ok(Step::Quit) => break,
            Err(msg) => eprintln!("{msg}"),
        }
    }
    Ok(())
}

enum Step {
    Continue,
    Quit,
}

fn split_command(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((c, rest)) => (c, rest.trim()),
        None => (line, ""),
    }
}

impl Session {
    fn command(&mut self, line: &str) -> Result<Step, String> {
        if line.is_empty() {
            return Ok(Step::Continue);
        }
        if !line.starts_with(':') {
            println!("{}", self.evaluate(line)?);
            return Ok(Step::Continue);
        }
        let (cmd, arg) = split_command(line);
        match cmd {
            ":quit" | ":q" => return Ok(Step::Quit),
            ":load" | ":l" => self.load(Path::new(arg))?,
            ":type" | ":t" => println!("{}", self.type_of(arg)?),
            ":display" | ":d" => match arg {
                "t" => self.display_types(),
                _ => return Err(format!("error: unknown display target `{arg}`; try `:d t`")),
            },
            ":help" | ":h" | ":?" => println!("{HELP}"),
            _ => return Err(format!("error: unknown command `{cmd}`; try `:help`")),
        }
        Ok(Step::Continue)
    }

    fn load(&mut self, path: &Path) -> Result<(), String> {
        let program =
            load_program(path, &default_search_paths()).map_err(|e| diagnostic(e.into()))?;
        let typed = check(&program).map_err(diagnostic)?;
        println!("loaded {}", path.display());
        self.base = program;
        self.loaded = Some(typed);
        Ok(())
    }

    fn typed_expr(&self, expr: &str) -> Result<TypedProgram, String> {
        if expr.is_empty() {
            return Err("error: expected an expression".into());
        }
        check(&with_entry_expr(&self.base, INPUT, expr).map_err(diagnostic)?).map_err(diagnostic)
    }

    fn type_of(&self, expr: &str) -> Result<String, String> {
        let typed = self.typed_expr(expr)?;
        let ty = &typed.entry_scheme().ty;
        Ok(display_types(&[ty]).remove(0))
    }

    fn evaluate(&self, expr: &str) -> Result<String, String> {
        let typed = self.typed_expr(expr)?;
        let compiled = compile(typed).map_err(diagnostic)?;
        exec::run_compiled(&compiled, &self.opts)
            .0
            .map_err(|f| f.to_string())
    }

    fn display_types(&self) {
        let Some(typed) = &self.loaded else {
            println!("no program loaded");
            return;
        };
        for b in &typed.program.bindings {
            if let Some(s) = typed.scheme(&b.name) {
                println!("{} : {}", b.name, display_types(&[&s.ty]).remove(0));
            }
        }
    }
}

fn diagnostic(e: PipelineError) -> String {
    format!("error: {e}")
}
