use std::process::ExitCode;

use clap::Parser;
use kropina_cli::{run, Cli, EXIT_COMPUTE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let text = outcome.render(cli.common.output);
    let code = match &cli.common.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => outcome.exit_code,
            Err(e) => {
                eprintln!("cannot write {}: {e}", path.display());
                EXIT_COMPUTE
            }
        },
        None => {
            print!("{text}");
            outcome.exit_code
        }
    };
    ExitCode::from(code as u8)
}
