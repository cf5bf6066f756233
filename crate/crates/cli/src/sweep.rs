//! Sweep spec:
//!
//! ```toml
//! base = "reference.toml"   # relative to the spec file
//! out = "sweep_out"         # optional, default "sweep"
//!
//! [[axis]]
//! path = "model.chi.chat"
//! values = [1.0, 2.0]
//! ```
//!
//! Axes combine as a Cartesian product, first axis slowest. Each run writes
//! into `run_NNNN/` under the sweep root.

use std::fs;
use std::path::{Path, PathBuf};

use arclab_core::config::{config_from_value, RunConfig};
use arclab_core::diagnostics::format_float;
use rayon::prelude::*;
use serde::Deserialize;
use toml::Value;

use crate::simulate::{execute, Outcome};
use crate::{EXIT_INVALID, EXIT_OK};

pub const THREADS_ENV: &str = "ARC_THREADS";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    base: PathBuf,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    axis: Vec<Axis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Axis {
    path: String,
    values: Vec<Value>,
}

fn fail(msg: String) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INVALID
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("malformed path `{path}`"));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| format!("`{path}`: `{key}` is not a section"))?;
        node = table
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| format!("`{path}` does not name a field inside a section"))?;
    table.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn label(v: &Value) -> String {
    match v {
        Value::Float(f) => f.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn thread_count() -> Result<usize, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got `{s}`")),
        },
    }
}

struct Job {
    index: usize,
    labels: Vec<String>,
    config: RunConfig,
}

pub fn cmd(spec_path: &Path, force: bool, out: Option<&Path>) -> u8 {
    let text = match fs::read_to_string(spec_path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", spec_path.display())),
    };
    let spec: SweepSpec = match toml::from_str(&text) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {}", spec_path.display(), e.message())),
    };
    if spec.axis.is_empty() {
        return fail("sweep spec has no [[axis]] entries".into());
    }
    for axis in &spec.axis {
        if axis.values.is_empty() {
            return fail(format!("axis `{}` has an empty value list", axis.path));
        }
        if let Some(v) = axis.values.iter().find(|v| v.is_table() || v.is_array()) {
            return fail(format!("axis `{}`: value {v} is not a scalar", axis.path));
        }
    }
    let spec_dir = spec_path.parent().unwrap_or(Path::new("."));
    let base_path = spec_dir.join(&spec.base);
    let base_dir = base_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let base: Value = match fs::read_to_string(&base_path).map_err(|e| e.to_string()).and_then(|t| {
        toml::from_str::<Value>(&t).map_err(|e| e.message().to_string())
    }) {
        Ok(v) => v,
        Err(e) => return fail(format!("{}: {e}", base_path.display())),
    };
    let root = out
        .map(Path::to_path_buf)
        .or(spec.out.map(|o| spec_dir.join(o)))
        .unwrap_or_else(|| PathBuf::from("sweep"));
    let threads = match thread_count() {
        Ok(n) => n,
        Err(e) => return fail(e),
    };

    let total: usize = spec.axis.iter().map(|a| a.values.len()).product();
    let mut jobs = Vec::with_capacity(total);
    for index in 0..total {
        let mut value = base.clone();
        let mut labels = Vec::new();
        let mut rest = index;
        let mut picks = vec![0; spec.axis.len()];
        for (k, axis) in spec.axis.iter().enumerate().rev() {
            picks[k] = rest % axis.values.len();
            rest /= axis.values.len();
        }
        for (axis, &pick) in spec.axis.iter().zip(&picks) {
            let v = axis.values[pick].clone();
            labels.push(label(&v));
            if let Err(e) = set_path(&mut value, &axis.path, v) {
                return fail(e);
            }
        }
        match config_from_value(value) {
            Ok(config) => jobs.push(Job { index, labels, config }),
            Err(e) => return fail(format!("run {index} ({}): {e}", labels.join(", "))),
        }
    }
    if let Err(e) = fs::create_dir_all(&root) {
        return fail(format!("{}: {e}", root.display()));
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(e.to_string()),
    };
    let outcomes: Vec<Outcome> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let dir = root.join(run_dir(job.index));
                execute(&job.config, &base_dir, &dir, force, true)
            })
            .collect()
    });

    let mut csv = String::from("run,dir");
    for axis in &spec.axis {
        csv.push(',');
        csv.push_str(&axis.path);
    }
    csv.push_str(",status,exit_code,sup_linf_u,max_energy_p\n");
    for (job, outcome) in jobs.iter().zip(&outcomes) {
        csv.push_str(&format!("{},{}", job.index, run_dir(job.index)));
        for l in &job.labels {
            csv.push(',');
            csv.push_str(l);
        }
        csv.push_str(&format!(
            ",{},{},{},{}\n",
            outcome.status,
            outcome.exit,
            format_float(outcome.sup_linf_u),
            format_float(outcome.max_energy_p)
        ));
        println!("{} {}: {}", run_dir(job.index), job.labels.join(" "), outcome.status);
    }
    let summary = root.join("sweep_summary.csv");
    if let Err(e) = fs::write(&summary, csv) {
        return fail(format!("{}: {e}", summary.display()));
    }
    EXIT_OK
}

fn run_dir(index: usize) -> String {
    format!("run_{index:04}")
}
