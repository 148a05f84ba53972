use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = pjgrid_cli::Cli::parse();
    match pjgrid_cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
