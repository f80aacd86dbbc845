use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use threshreg_cli::args::{Cli, Command};
use threshreg_cli::commands;
use threshreg_cli::error::CliError;

fn render<T: Serialize>(value: &T, json: bool, text: impl FnOnce(&T) -> String) -> String {
    if json {
        serde_json::to_string_pretty(value).expect("reports serialize")
    } else {
        text(value)
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    }
    let json = !cli.format.text;
    Ok(match &cli.command {
        Command::Detect(a) => render(&commands::run_detect(a)?, json, |r| r.to_text()),
        Command::CriticalValues(a) => render(&commands::run_critical_values(a)?, json, |r| r.to_text()),
        Command::Simulate(a) => render(&commands::run_simulate(a)?, json, |r| r.to_text()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if !cli.format.text {
                println!("{}", serde_json::to_string_pretty(&e.report()).expect("errors serialize"));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
