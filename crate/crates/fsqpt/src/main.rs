use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = fsqpt::cli::Cli::parse();
    fsqpt::cli::execute(cli)
}
