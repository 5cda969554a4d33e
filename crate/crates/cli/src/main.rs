mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use config::{given, CliConfig};
use error::CliError;

fn run() -> Result<String, CliError> {
    let matches = Cli::command().get_matches();
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::usage(e.to_string()))?;
    let cfg = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    let jobs = if given(&matches, "jobs") { cli.jobs } else { cfg.jobs.unwrap_or(cli.jobs) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::runtime(format!("cannot start worker pool: {e}")))?;

    let (_, sub) = matches.subcommand().expect("subcommand is required");
    pool.install(|| match &cli.command {
        Command::Synth(a) => commands::synth(&cfg, sub, a),
        Command::Enroll(a) => commands::enroll(&cfg, sub, a),
        Command::Evaluate(a) => commands::evaluate_cmd(&cfg, sub, a),
        Command::Identify(a) => commands::identify_cmd(&cfg, sub, a),
        Command::Features(a) => commands::features(&cfg, a),
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
