//! Runs the reduced verification suite and prints one line per check.
//! Pass `full` for the default instance counts.

use nonthermal::experiments::{run_verification_suite, VerifySettings};

fn main() -> nonthermal::Result<()> {
    let settings = match std::env::args().nth(1).as_deref() {
        Some("full") => VerifySettings::default(),
        _ => VerifySettings::quick(),
    };
    let report = run_verification_suite(&settings, None)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    if !report.passed {
        std::process::exit(1);
    }
    Ok(())
}
