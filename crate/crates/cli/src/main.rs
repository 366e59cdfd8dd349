use std::process::ExitCode;

use clap::Parser;
use driftls_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((outcome, csv)) => {
            if csv {
                print!("{}", outcome.table.render());
            } else {
                println!("{}", outcome.message);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("driftls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
