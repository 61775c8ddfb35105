use std::io::{self, Write};
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use vcsp_landscape::cli::{run, Cli, CliError, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = io::stderr();
    let result = run(cli, &mut out, &mut err);
    let _ = out.flush();
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(CliError::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            let _ = Cli::command()
                .error(clap::error::ErrorKind::ValueValidation, msg)
                .print();
            ExitCode::from(2)
        }
    }
}
