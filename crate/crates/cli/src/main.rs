use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use vspec_cli::{run, Cli, Outcome};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => Outcome::Error.code(),
            };
            std::process::exit(code);
        }
    };
    let report = run(&cli);
    let _ = std::io::stdout().write_all(report.stdout.as_bytes());
    let _ = std::io::stderr().write_all(report.stderr.as_bytes());
    std::process::exit(report.outcome.code());
}
