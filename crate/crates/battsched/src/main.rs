use std::process::ExitCode;

use clap::Parser;

use battsched::cli::{run_experiment, Cli, ErrorReport};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_experiment(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        // Validation ran but found bad files; the report is already printed.
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let report = serde_json::json!({ "error": ErrorReport::from_error(&e) });
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("error report serializes")
            );
            ExitCode::FAILURE
        }
    }
}
