use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = ase_cli::Cli::parse();
    match ase_cli::run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ase: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
