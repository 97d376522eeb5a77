//! Driver for sparsified AMG experiments: config handling and the
//! `solve`, `sweep`, `model` and `spy` commands.
//!
//! Exit codes: 0 converged (or command finished), 2 not converged or
//! Krylov breakdown, 1 any other error.

pub mod args;
pub mod commands;
pub mod config;

use clap::Parser;

pub use args::{Cli, Command, Overrides};
pub use commands::{cmd_model, cmd_solve, cmd_spy, cmd_sweep, read_spy, run_solve, Status};
pub use config::{Method, RhsMode, RunConfig};

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Solve(o) => Ok(cmd_solve(&o.resolve()?)?.exit_code()),
        Command::Sweep { overrides, schedules } => {
            let mut cfg = overrides.resolve()?;
            args::apply_schedules(&mut cfg, schedules.as_deref())?;
            let rows = cmd_sweep(&cfg)?;
            for r in &rows {
                log::info!("{:?}: {} ({:?} iterations)", r.schedule, r.status, r.iterations);
            }
            Ok(0)
        }
        Command::Model(o) => {
            cmd_model(&o.resolve()?)?;
            Ok(0)
        }
        Command::Spy(o) => {
            cmd_spy(&o.resolve()?)?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
