use clap::Parser;
use henon4_cli::config::{Cli, RunConfig};
use henon4_cli::{run, EXIT_INVALID};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    let code = match RunConfig::from_cli(&cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    };
    std::process::exit(code);
}
