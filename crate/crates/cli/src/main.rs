//! `superword`: train, apply and measure byte-level BPE tokenizers with
//! superword (cross-pretoken) merges.

mod args;
mod bench;
mod encode;
mod error;
mod stats;
mod train;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Encode(a) => encode::run_encode(a),
        Command::Decode(a) => encode::run_decode(a),
        Command::Stats(a) => stats::run(a),
        Command::Bench(a) => bench::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
