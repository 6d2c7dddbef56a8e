mod args;
mod bench;
mod commands;
mod config;
mod manifest;
mod models;

use std::process::ExitCode;

use clap::Parser;

const EXIT_ERROR: u8 = 2;

fn run() -> anyhow::Result<u8> {
    let cli = args::Cli::parse();
    if let Some(n) = config::threads_from_env()? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    commands::execute(cli.command)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
