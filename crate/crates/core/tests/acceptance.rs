//! Prints one PASS/FAIL line per acceptance criterion; exits non-zero if
//! any fails.

use std::process::ExitCode;

use geocensus_core::verify::{run, Profile};

fn main() -> ExitCode {
    let profile = Profile::named("desk").expect("desk profile exists");
    match run(&profile) {
        Ok(report) => {
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            println!("FAIL acceptance run aborted: {e}");
            ExitCode::FAILURE
        }
    }
}
