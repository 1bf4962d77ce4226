use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abw_cli::{init_threads, load, parse_values, run, sweep, validate, CliError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ab-wavelab", version, about = "Aharonov-Bohm wave experiments from JSON scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.json and CSV files.
    Run { config: PathBuf },
    /// Check a scenario without running it.
    Validate { config: PathBuf },
    /// Run a scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// Dotted path or JSON pointer into the scenario, e.g. experiment.mirror.k
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Exit code of a completed command; errors map through `CliError::exit_code`.
fn execute(cli: Cli) -> Result<u8, CliError> {
    init_threads(std::env::var("AB_WAVELAB_THREADS").ok())?;
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let r = run(&cfg, &base_dir(&config))?;
            let (name, value) = r.headline();
            println!("{}: {name} = {value}", r.experiment);
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let diags = validate(&cfg);
            if !diags.is_empty() {
                return Err(CliError::Invalid(diags));
            }
            println!("{}: ok", config.display());
        }
        Command::Sweep { config, param, values } => {
            let cfg = load(&config)?;
            let rows = sweep(&cfg, &base_dir(&config), &param, &parse_values(&values)?)?;
            let mut worst = 0;
            for r in &rows {
                match &r.error {
                    None => println!("{} = {}: {} = {}", param, r.value, r.metric, r.result),
                    Some(e) => eprintln!("{} = {}: {e}", param, r.value),
                }
                worst = worst.max(r.exit_code);
            }
            if worst != 0 {
                let failed = rows.iter().filter(|r| r.exit_code != 0).count();
                eprintln!("error: {failed} of {} runs failed", rows.len());
            }
            return Ok(worst as u8);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
