use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wedderburn_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = run(&cli);
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    if let Some(report) = &outcome.report {
        let json = report.to_json();
        let written = match &cli.common.json {
            Some(path) => std::fs::write(path, json).map_err(|e| format!("{}: {e}", path.display())),
            None => std::io::stdout().write_all(json.as_bytes()).map_err(|e| e.to_string()),
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(outcome.code)
}
