use std::process::ExitCode;

use clap::Parser;
use euclid_cli::args::Cli;
use euclid_cli::config::RunConfig;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(&cli).and_then(|cfg| {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global()?;
        euclid_cli::execute(&cfg)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
