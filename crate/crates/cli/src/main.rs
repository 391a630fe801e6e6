use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tsirelson_cli::commands::{self, Cli, WORKERS_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var(WORKERS_ENV) {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: cannot start {n} workers: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: {WORKERS_ENV} must be a positive integer, got `{raw}`");
                return ExitCode::from(2);
            }
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
