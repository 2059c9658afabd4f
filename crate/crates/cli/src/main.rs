mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let config = match config::parse_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&config) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
