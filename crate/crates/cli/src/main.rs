use std::process::ExitCode;

use clap::Parser;
use dvr_orbits_cli::{run, Cli, ExperimentConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ExperimentConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(jobs) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start {jobs} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let report = run(&cfg);
    print!("{}", report.render(cfg.format));
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
