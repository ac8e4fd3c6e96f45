//! Experiment runner behind the `henon4` binary.

pub mod config;
pub mod emit;
pub mod experiments;

use std::time::Instant;

pub use config::{Command, ConfigError, Format, ParamFile, RunConfig, SigmaToken};
pub use emit::{render, write_outputs, Table};
pub use experiments::{Check, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Runs a validated config, writes its artifacts and prints a summary.
pub fn run(cfg: &RunConfig) -> i32 {
    let t0 = Instant::now();
    let outcome = match experiments::execute(cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let written = match write_outputs(&cfg.out_dir, &outcome.files) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: writing outputs to {}: {e}", cfg.out_dir.display());
            return EXIT_NUMERICAL;
        }
    };

    println!("{} ({:.2?})", cfg.command.as_str(), t0.elapsed());
    for line in &outcome.summary {
        println!("  {line}");
    }
    for c in &outcome.checks {
        println!("  [{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for p in &written {
        println!("  wrote {}", p.display());
    }
    if outcome.checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}
