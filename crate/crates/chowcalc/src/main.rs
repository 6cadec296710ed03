//! Binary entry point; all logic lives in the library's cli module.

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(chowcalc::cli::main_entry())
}
