//! `ab-wavelab`: JSON scenario files in, report.json and CSV files out.

pub mod config;
mod error;
mod run;
mod sweep;

pub use config::{load, parse, validate, Experiment, FieldDump, ScenarioConfig};
pub use error::CliError;
pub use run::{resolve_output, run, RunReport};
pub use sweep::{parse_values, set_param, sweep, SweepRow};

/// Caps the global rayon pool from `AB_WAVELAB_THREADS` when set.
pub fn init_threads(var: Option<String>) -> Result<(), CliError> {
    let Some(v) = var else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Threads(format!("AB_WAVELAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}
