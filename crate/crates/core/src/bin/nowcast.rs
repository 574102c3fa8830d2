use std::process::ExitCode;

use clap::Parser;
use nowcast::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
