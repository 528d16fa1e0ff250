use std::process::ExitCode;

use clap::Parser;
use hiercc_cli::args::Cli;

fn main() -> ExitCode {
    hiercc_cli::main_with(Cli::parse())
}
