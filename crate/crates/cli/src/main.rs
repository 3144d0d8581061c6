use std::process::ExitCode;

use clap::Parser;
use spacobi_cli::{init_threads, run, Cli, EXIT_PARSE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = init_threads().and_then(|_| run(&cli)) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    ExitCode::SUCCESS
}
