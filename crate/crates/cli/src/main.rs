//! `biasshift` command-line tool.
//!
//! Exit codes: 0 success, 1 internal error, 2 input error, 3 attribute
//! mismatch between the reference and generated tables.

mod args;
mod commands;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Categorize(a) => commands::categorize_cmd(a),
        Command::SamplingError(a) => commands::sampling_error(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    if let Err(e) = result {
        eprintln!("biasshift: {}", e.message);
        std::process::exit(e.code);
    }
}
