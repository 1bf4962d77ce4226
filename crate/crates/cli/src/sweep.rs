//! One run per value of a single config parameter.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::ScenarioConfig;
use crate::{run, CliError};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: Value,
    pub metric: String,
    pub result: f64,
    /// Diagnostic when the run failed.
    pub error: Option<String>,
    pub exit_code: i32,
}

/// Comma-separated JSON scalars; bare words are taken as strings.
pub fn parse_values(list: &str) -> Result<Vec<Value>, CliError> {
    let values: Vec<Value> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_owned())))
        .collect();
    if values.is_empty() {
        return Err(CliError::Sweep("empty value list".into()));
    }
    Ok(values)
}

/// Sets `path` (dotted, e.g. `experiment.magnetic_single.fluxes.0.flux`, or a JSON
/// pointer) to `value`. The key must already exist.
pub fn set_param(config: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let pointer = if path.starts_with('/') {
        path.to_owned()
    } else {
        format!("/{}", path.replace('.', "/"))
    };
    let slot = config
        .pointer_mut(&pointer)
        .ok_or_else(|| CliError::Sweep(format!("no parameter at {path}")))?;
    *slot = value;
    Ok(())
}

/// Runs each value into `<output_dir>/sweep_NNN` and writes sweep.csv in `output_dir`.
pub fn sweep(config: &ScenarioConfig, base: &Path, param: &str, values: &[Value]) -> Result<Vec<SweepRow>, CliError> {
    let root = serde_json::to_value(config).expect("configs serialize");
    let out = crate::resolve_output(config, base);
    let mut rows = Vec::new();
    for (index, value) in values.iter().enumerate() {
        let mut v = root.clone();
        set_param(&mut v, param, value.clone())?;
        let mut cfg: ScenarioConfig =
            serde_json::from_value(v).map_err(|e| CliError::Sweep(format!("value {value} for {param}: {e}")))?;
        cfg.output_dir = out.join(format!("sweep_{index:03}"));
        let (metric, result, error, exit_code) = match run(&cfg, base) {
            Ok(r) => {
                let (m, x) = r.headline();
                (m.to_owned(), x, None, 0)
            }
            Err(e) => (String::new(), f64::NAN, Some(e.to_string()), e.exit_code()),
        };
        rows.push(SweepRow {
            index,
            value: value.clone(),
            metric,
            result,
            error,
            exit_code,
        });
    }
    std::fs::create_dir_all(&out).map_err(|source| CliError::Write {
        path: out.clone(),
        source,
    })?;
    let mut text = String::from("index,value,metric,result,exit_code\n");
    for r in &rows {
        text += &format!("{},{},{},{},{}\n", r.index, r.value, r.metric, r.result, r.exit_code);
    }
    let path = out.join("sweep.csv");
    std::fs::write(&path, text).map_err(|source| CliError::Write { path, source })?;
    Ok(rows)
}
