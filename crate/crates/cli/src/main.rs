use std::process::ExitCode;

use clap::Parser;

use cw_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    match run(&config) {
        Ok(report) => {
            println!("{}", report.render(config.format));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
