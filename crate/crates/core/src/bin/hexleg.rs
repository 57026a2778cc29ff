use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hexleg::harness::{execute, Command, HarnessError, Overrides, RunConfig};

/// Leg kinematics, workspace, manipulability and body-flexibility experiments.
#[derive(Debug, Parser)]
#[command(name = "hexleg", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = (|| -> Result<_, HarnessError> {
        let mut cfg = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply_env();
        cli.overrides.apply(&mut cfg)?;
        execute(cli.command, &cfg)
    })();
    match result {
        Ok((report, paths)) => {
            for line in &report.summary {
                println!("{line}");
            }
            for line in &report.flagged {
                eprintln!("flagged: {line}");
            }
            eprintln!(
                "wrote {} files in {:.2} s",
                paths.len(),
                report.duration.as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hexleg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
