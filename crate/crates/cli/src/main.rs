//! `qmagic`: build and verify the q-analogue magic matrices and the
//! induced-degree bound on powers of directed cycles.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage error,
//! 3 resource limit.

mod args;
mod render;

use std::process::ExitCode;

use clap::Parser;
use qmagic::Error;

use crate::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match render::run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("qmagic: {e}");
            ExitCode::from(match e {
                render::CliError::Core(Error::ResourceLimit { .. }) => 3,
                _ => 2,
            })
        }
    }
}
