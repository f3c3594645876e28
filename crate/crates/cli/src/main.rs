mod args;
mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use extrinsic::harness::Verdict;

/// Exit statuses: 0 success, 1 failed checks, 2 usage, 3 computation.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(anyhow::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Compute(e) => write!(f, "{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Compute(e.into())
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli, started) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: computation failed: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli, started: Instant) -> Result<u8, CliError> {
    let file = config::FileConfig::load(cli.global.config.as_deref())?;
    let common = config::common(&cli.global, &file, cli.command.name());
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let outcome = commands::execute(&cli.command, &file)?;
    output::write_run(&common, &cli.command, &outcome, started)?;

    let report = &outcome.report;
    let inconclusive = report.count(Verdict::Inconclusive);
    let mut lines = outcome.lines.clone();
    lines.extend(report.checks.iter().map(|c| c.summary()));
    if !report.checks.is_empty() {
        lines.push(format!(
            "{} passed, {} failed, {} inconclusive",
            report.count(Verdict::Pass),
            report.count(Verdict::Fail),
            inconclusive
        ));
    }
    // A closed pipe (`| head`) is not an error.
    let mut out = std::io::stdout().lock();
    for line in lines {
        if writeln!(out, "{line}").is_err() {
            break;
        }
    }
    Ok(if report.has_failures() || (common.strict && inconclusive > 0) { 1 } else { 0 })
}
