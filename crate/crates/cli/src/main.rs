mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analytic { state, output } => commands::analytic(&state, &output),
        Command::Simulate {
            state,
            run,
            output,
            records,
        } => commands::simulate(&state, &run, &output, records.as_deref()),
        Command::Estimate { source, output, k } => commands::estimate(&source, &output, k),
        Command::Tomography { source, output } => commands::tomography(&source, &output),
        Command::Sweep {
            state,
            run,
            output,
            g_list,
            n_list,
        } => commands::sweep(&state, &run, &output, &g_list, &n_list),
        Command::PaperExample { run, output } => commands::paper_example(&run, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakbayes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
