use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use arclab_core::certifier::{AuxConstants, Coefficients};
use arclab_core::config::{parse_config, resolve, ConfigError, ResolvedConfig, RunConfig};
use arclab_core::diagnostics::{
    bounds_check, energy_monitor, form_check, format_float, BoundsTolerance, DiagnosticsRecord,
    RecordExtras, Violation,
};
use arclab_core::model::{Grid, SystemState};
use arclab_core::solver::snapshot::write_snapshot;
use arclab_core::solver::{run, Observer, RunStatus, SolverError};
use serde::Serialize;
use serde_json::json;

use crate::{EXIT_BLOWUP, EXIT_INVALID, EXIT_NEGATIVE, EXIT_OK, EXIT_VIOLATIONS};

/// What a finished (or refused) simulation reports back.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub status: String,
    pub exit: u8,
    pub message: Option<String>,
    pub sup_linf_u: f64,
    pub max_energy_p: f64,
}

impl Outcome {
    fn refused(status: &str, exit: u8, message: String) -> Self {
        Self {
            status: status.to_string(),
            exit,
            message: Some(message),
            sup_linf_u: f64::NAN,
            max_energy_p: f64::NAN,
        }
    }
}

pub fn cmd(config: &Path, force: bool, out: Option<&Path>) -> u8 {
    let cfg = match parse_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return EXIT_INVALID;
        }
    };
    let base_dir = config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
    let outcome = execute(&cfg, &base_dir, &out_dir, force, false);
    if let Some(msg) = &outcome.message {
        eprintln!("{}: {msg}", outcome.status);
    }
    println!("status: {} (exit {})", outcome.status, outcome.exit);
    outcome.exit
}

fn config_exit(e: &ConfigError) -> Outcome {
    let hint = match e {
        ConfigError::NotCertified(_) => " (rerun with --force-params to explore anyway)",
        _ => "",
    };
    Outcome::refused("ConfigError", EXIT_INVALID, format!("{e}{hint}"))
}

/// Resolves, runs and writes every output file into `out_dir`.
pub fn execute(cfg: &RunConfig, base_dir: &Path, out_dir: &Path, force: bool, quiet: bool) -> Outcome {
    let resolved = match resolve(cfg, base_dir, force) {
        Ok(r) => r,
        Err(e) => return config_exit(&e),
    };
    if resolved.forced && !quiet {
        banner(&resolved);
    }
    match write_run(&resolved, out_dir) {
        Ok(o) => o,
        Err(e) => Outcome::refused("Failed", EXIT_NEGATIVE, e),
    }
}

fn banner(resolved: &ResolvedConfig) {
    let rule = "=".repeat(72);
    eprintln!("{rule}");
    eprintln!("WARNING: --force-params: these parameters are NOT covered by the");
    eprintln!("boundedness theorem; results are exploratory only.");
    for note in resolved.notes.iter().filter(|n| n.starts_with("FORCED: ")) {
        eprintln!("  {}", note.trim_start_matches("FORCED: "));
    }
    eprintln!("{rule}");
}

struct OutputWriter {
    dir: PathBuf,
    grid: Grid,
    series: BufWriter<File>,
    manifest: BufWriter<File>,
    snapshots: bool,
    frame: usize,
    aux: AuxConstants,
    tol: BoundsTolerance,
    form: Option<Coefficients>,
    violations: Vec<Violation>,
    energy: Vec<(f64, f64)>,
    records: Vec<DiagnosticsRecord>,
    below_floor_max: usize,
}

fn io_err(e: std::io::Error) -> SolverError {
    SolverError::Observer(e.to_string())
}

impl Observer for OutputWriter {
    fn on_output(&mut self, state: &SystemState, record: &DiagnosticsRecord, extras: &RecordExtras) -> Result<(), SolverError> {
        writeln!(self.series, "{}", record.to_csv_row()).map_err(io_err)?;
        self.violations.extend(bounds_check(record, &self.aux, &self.tol));
        if let Some(c) = &self.form {
            self.violations.extend(form_check(record, c));
        }
        self.energy.push((record.t, record.energy_p));
        self.records.push(record.clone());
        self.below_floor_max = self.below_floor_max.max(extras.below_floor_cells);
        if self.snapshots {
            for (name, field) in [("u", &state.u), ("v", &state.v), ("w", &state.w)] {
                let rel = format!("snapshots/{name}_{:06}.arcs", self.frame);
                let file = File::create(self.dir.join(&rel)).map_err(io_err)?;
                write_snapshot(BufWriter::new(file), &self.grid, field)?;
                writeln!(self.manifest, "{},{name},{rel}", format_float(record.t)).map_err(io_err)?;
            }
        }
        self.frame += 1;
        Ok(())
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

fn fold(records: &[DiagnosticsRecord], pick: impl Fn(&DiagnosticsRecord) -> f64, max: bool) -> f64 {
    records.iter().map(pick).fold(if max { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else if max {
            a.max(b)
        } else {
            a.min(b)
        }
    })
}

fn write_run(resolved: &ResolvedConfig, out_dir: &Path) -> Result<Outcome, String> {
    let mk = |p: &Path| fs::create_dir_all(p).map_err(|e| format!("{}: {e}", p.display()));
    mk(out_dir)?;
    if resolved.snapshots {
        mk(&out_dir.join("snapshots"))?;
    }
    fs::write(out_dir.join("resolved.json"), resolved.to_json() + "\n")
        .map_err(|e| format!("resolved.json: {e}"))?;
    let open = |name: &str| {
        File::create(out_dir.join(name))
            .map(BufWriter::new)
            .map_err(|e| format!("{name}: {e}"))
    };
    let mut series = open("series.csv")?;
    let mut manifest = open("manifest.csv")?;
    writeln!(series, "{}", DiagnosticsRecord::csv_header()).map_err(|e| e.to_string())?;
    writeln!(manifest, "time,field,path").map_err(|e| e.to_string())?;

    let mut writer = OutputWriter {
        dir: out_dir.to_path_buf(),
        grid: resolved.grid.clone(),
        series,
        manifest,
        snapshots: resolved.snapshots,
        frame: 0,
        aux: resolved.aux.clone(),
        tol: BoundsTolerance::for_aux(&resolved.aux),
        form: resolved.negative_definite.then_some(resolved.coefficients),
        violations: Vec::new(),
        energy: Vec::new(),
        records: Vec::new(),
        below_floor_max: 0,
    };
    let result = run(&resolved.run_setup(), &mut writer);
    writer.series.flush().map_err(|e| e.to_string())?;
    writer.manifest.flush().map_err(|e| e.to_string())?;

    let records = &writer.records;
    let sup_linf_u = fold(records, |r| r.linf_u, true);
    let max_energy_p = fold(records, |r| r.energy_p, true);
    let monitor = energy_monitor(&writer.energy, resolved.aux.theta).ok();
    let (status, exit, reason, error, stats) = match &result {
        Ok(r) => {
            let (status, exit) = match r.status {
                RunStatus::SuspectedBlowup => ("SuspectedBlowup", EXIT_BLOWUP),
                RunStatus::Completed if writer.violations.is_empty() => ("Completed", EXIT_OK),
                RunStatus::Completed => ("Completed", EXIT_VIOLATIONS),
            };
            (status, exit, r.blowup_reason.clone(), None, Some(&r.stats))
        }
        Err(e) => ("Failed", EXIT_NEGATIVE, None, Some(e.to_string()), None),
    };
    let summary = json!({
        "status": status,
        "exit_code": exit,
        "blowup_reason": reason,
        "error": error,
        "t_final": records.last().map(|r| r.t),
        "samples": records.len(),
        "suprema": {
            "linf_u": sup_linf_u,
            "linf_v": fold(records, |r| r.linf_v, true),
            "linf_w": fold(records, |r| r.linf_w, true),
            "grad_linf_v": fold(records, |r| r.grad_linf_v, true),
            "grad_linf_w": fold(records, |r| r.grad_linf_w, true),
            "energy_p": max_energy_p,
            "Q_max": fold(records, |r| r.q_max, true),
            "f_max": fold(records, |r| r.f_max, true),
        },
        "infima": {
            "min_v": fold(records, |r| r.min_v, false),
            "min_w": fold(records, |r| r.min_w, false),
            "f_min": fold(records, |r| r.f_min, false),
        },
        "bounds": {
            "eta1": resolved.aux.eta1,
            "eta2": resolved.aux.eta2,
            "c4": resolved.aux.c4,
            "tolerance": writer.tol,
            "form_checked": writer.form.is_some(),
        },
        "violation_count": writer.violations.len(),
        "violations": writer.violations,
        "stats": stats,
        "relative_mass_drift": stats.map(|s| s.relative_mass_drift()),
        "max_cells_below_floor": writer.below_floor_max,
        "energy_monitor": monitor,
        "forced": resolved.forced,
        "notes": resolved.notes,
    });
    write_json(&out_dir.join("summary.json"), &summary)?;
    let message = match (&result, reason) {
        (Err(e), _) => Some(e.to_string()),
        (Ok(_), Some(r)) => Some(r),
        _ if !writer.violations.is_empty() => Some(format!("{} bound violations", writer.violations.len())),
        _ => None,
    };
    Ok(Outcome {
        status: status.to_string(),
        exit,
        message,
        sup_linf_u,
        max_energy_p,
    })
}
