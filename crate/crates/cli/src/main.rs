mod args;
mod commands;
mod csv;
mod error;
mod settings;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Output;
use error::{CliError, Result};

fn dispatch(cmd: Command) -> Result<Output> {
    match cmd {
        Command::FidelitySweep(a) => commands::fidelity_sweep(a),
        Command::ProbSweep(a) => commands::prob_sweep(a),
        Command::MeanphotonSweep(a) => commands::meanphoton_sweep(a),
        Command::DetectorReport(a) => commands::detector_report(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
    }
}

fn emit(output: &Output) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, &output.csv).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.csv.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let output = dispatch(cli.command)?;
    emit(&output)?;
    match output.failure {
        Some(msg) => Err(CliError::OracleFailed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
