use std::process::ExitCode;

use clap::Parser;
use monitored_qubit_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mqubit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
