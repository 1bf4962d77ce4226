use std::path::PathBuf;

use abw_experiments::ExperimentError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}:{column}: parse error: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("{0}")]
    Experiment(#[from] ExperimentError),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Threads(String),
}

impl CliError {
    /// 2 for anything wrong with the input, 3 for numerical failures, 1 for I/O on
    /// the output side.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Experiment(e) if e.is_numerical() => 3,
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }
}
