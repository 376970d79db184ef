use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use digitfract::cli::{error_json, run_command, Format, JobConfig};
use digitfract::Error;

/// Run one digitfract job described by a JSON config file.
#[derive(Parser)]
#[command(name = "digitfract", version)]
struct Args {
    /// Path to the job config.
    config: PathBuf,
    /// Output format; overrides the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = JobConfig::from_json(&text)?;
    config.apply_budget_env()?;
    let report = run_command(&config)?;
    let format = args.format.or(config.output.format).unwrap_or_default();
    let rendered = report.render(format)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output.path.as_ref().map(PathBuf::from));
    match out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
