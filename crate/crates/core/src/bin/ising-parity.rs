use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ising_parity::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(&args.command) {
        Ok(outcome) => {
            if let Some(text) = &outcome.stdout {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(text.as_bytes()).is_err() {
                    return ExitCode::from(cli::EXIT_NUMERICAL as u8);
                }
            }
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
