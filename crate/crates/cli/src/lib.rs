//! Command-line front end. [`run`] parses arguments, merges an optional JSON
//! config, executes the subcommand and writes its table.
//!
//! Exit codes: 0 success, 1 violations found, 2 bad arguments or config,
//! 3 runtime failure.

// `!(x > 0.0)` is deliberate: it rejects NaN together with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod grid;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command, Options};
pub use commands::{execute, Failure, Outcome};
pub use grid::GridSpec;
pub use output::{Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Resolves flags over the config file named by `--config`, if any.
pub fn resolve(command: &Command) -> Result<Options, Failure> {
    let flags = command.options();
    match &flags.config {
        Some(path) => Ok(flags.over(Options::load(path).map_err(|e| Failure::Config(format!("{e:#}")))?)),
        None => Ok(flags.clone()),
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = resolve(&cli.command).and_then(|o| execute(&cli.command, &o).map(|out| (o, out)));
    let (options, outcome) = match result {
        Ok(v) => v,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            return EXIT_CONFIG;
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            return EXIT_RUNTIME;
        }
    };
    let text = outcome.table.render(options.format.unwrap_or(Format::Csv));
    let written = match &options.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write `{}`: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(m) = written {
        eprintln!("error: {m}");
        return EXIT_RUNTIME;
    }
    if outcome.violations {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    }
}
