use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arclab_core::solver::snapshot::read_snapshot;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_arclab");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn arclab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("ARC_THREADS", "1").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Copies `small.toml` into `dir` after applying `edit` to its text.
fn small_variant(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let text = fs::read_to_string(configs().join("small.toml")).unwrap();
    let path = dir.join(name);
    fs::write(&path, edit(text)).unwrap();
    path
}

fn simulate(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    arclab(&args)
}

#[test]
fn certify_exit_codes() {
    let ok = arclab(&["certify", "--n", "2", "--alpha", "20", "--beta", "4"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["certified"], true);
    assert!(report["witness"]["p"].as_f64().unwrap() > 1.0);

    let low = arclab(&["certify", "--n", "2", "--alpha", "5", "--beta", "4"]);
    assert_eq!(code(&low), 1);
    let report: Value = serde_json::from_slice(&low.stdout).unwrap();
    assert_eq!(report["certified"], false);

    let edge = arclab(&["certify", "--n", "2", "--alpha", "20", "--beta", "3"]);
    assert_eq!(code(&edge), 1);
    let report: Value = serde_json::from_slice(&edge.stdout).unwrap();
    assert_eq!(report["reason"], "BetaInfeasible");

    assert_eq!(code(&arclab(&["certify", "--n", "1", "--alpha", "20", "--beta", "4"])), 2);
    assert_eq!(code(&arclab(&["certify", "--n", "2", "--alpha", "20", "--beta", "4", "--chi-k", "2"])), 2);
}

#[test]
fn zero_horizon_writes_one_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_variant(tmp.path(), "zero.toml", |t| t.replace("t_end = 0.5", "t_end = 0.0"));
    let out = simulate(&cfg, &tmp.path().join("run"), &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let series = fs::read_to_string(tmp.path().join("run/series.csv")).unwrap();
    assert_eq!(series.lines().count(), 2);
}

#[test]
fn unknown_key_is_reported_with_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_variant(tmp.path(), "typo.toml", |t| t.replace("dt_max = 0.01", "dt_max = 0.01\nfoo = 1"));
    let line = fs::read_to_string(&cfg).unwrap().lines().position(|l| l == "foo = 1").unwrap() + 1;
    let out = simulate(&cfg, &tmp.path().join("run"), &[]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("foo") && err.contains(&format!("line {line}")), "{err}");
}

#[test]
fn weak_decay_exponent_is_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_variant(tmp.path(), "k.toml", |t| t.replacen("k = 2.0", "k = 0.5", 1));
    let out = simulate(&cfg, &tmp.path().join("run"), &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("model.chi.k"), "{}", stderr(&out));
}

#[test]
fn uncertified_pair_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("collapse.toml");
    let out = simulate(&cfg, &tmp.path().join("run"), &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--force-params"));
    assert!(!tmp.path().join("run/series.csv").exists());
}

#[test]
fn resolved_config_has_no_auto_and_snapshots_read_back() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_variant(tmp.path(), "snap.toml", |t| {
        t.replace("alpha = 5.7", "alpha = \"auto\"")
            .replace("beta = 5.5", "beta = \"auto\"")
            .replace("interval = 0.1", "interval = 0.25\nsnapshots = true")
    });
    let dir = tmp.path().join("run");
    let out = simulate(&cfg, &dir, &["--force-params"]);
    let text = fs::read_to_string(dir.join("resolved.json")).unwrap();
    assert!(!text.contains("\"auto\""), "{text}");
    assert!(matches!(code(&out), 0 | 4), "{}", stderr(&out));

    let manifest = fs::read_to_string(dir.join("manifest.csv")).unwrap();
    let rows: Vec<&str> = manifest.lines().skip(1).collect();
    assert_eq!(rows.len(), 3 * 3);
    for row in rows {
        let rel = row.split(',').nth(2).unwrap();
        let snap = read_snapshot(fs::File::open(dir.join(rel)).unwrap()).unwrap();
        assert_eq!((snap.dim, snap.cells), (2, [16, 16]));
        assert_eq!(snap.values.len(), 256);
        assert!(snap.values.iter().all(|x| x.is_finite() && *x >= 0.0));
    }
}

#[test]
fn bound_violations_exit_four() {
    let tmp = tempfile::tempdir().unwrap();
    // An inflated c0 puts the eta floors at the initial signal level, from
    // which v and w decay toward the mean of u.
    let cfg = small_variant(tmp.path(), "viol.toml", |t| {
        t.replace("beta = 5.5", "beta = 5.5\nc0 = 1000.0").replace("base = 9.0", "base = 20.0")
    });
    let dir = tmp.path().join("run");
    let out = simulate(&cfg, &dir, &[]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let summary = json(&dir.join("summary.json"));
    assert_eq!(summary["status"], "Completed");
    assert!(summary["violation_count"].as_u64().unwrap() > 0);
}

#[test]
fn sweep_writes_one_directory_and_row_per_combination() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("sweep");
    let out = arclab(&["sweep", configs().join("sweep.toml").to_str().unwrap(), "--out", root.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(root.join("sweep_summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "run,dir,model.chi.chat,weights.r,status,exit_code,sup_linf_u,max_energy_p");
    assert_eq!(lines.len(), 5);
    for k in 0..4 {
        assert!(root.join(format!("run_{k:04}/series.csv")).exists());
        assert!(lines[k + 1].contains(",Completed,0,"), "{}", lines[k + 1]);
    }
}

#[test]
fn sweep_reports_mixed_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.toml");
    let base = configs().join("collapse.toml");
    fs::write(
        &spec,
        format!(
            "base = {:?}\n\n[[axis]]\npath = \"model.chi.chat\"\nvalues = [1.0, 60.0]\n",
            base.to_str().unwrap()
        ),
    )
    .unwrap();
    let root = tmp.path().join("out");
    let out = arclab(&["sweep", spec.to_str().unwrap(), "--force-params", "--out", root.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(root.join("sweep_summary.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",Completed,"), "{}", rows[0]);
    assert!(rows[1].contains(",SuspectedBlowup,3,"), "{}", rows[1]);
}

#[test]
fn sweep_without_axes_is_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.toml");
    let base = configs().join("small.toml");
    fs::write(&spec, format!("base = {:?}\n", base.to_str().unwrap())).unwrap();
    assert_eq!(code(&arclab(&["sweep", spec.to_str().unwrap()])), 2);
}

#[test]
fn convergence_exit_codes() {
    let fine = arclab(&["convergence", "--cells", "8,16,32"]);
    assert_eq!(code(&fine), 0, "{}", String::from_utf8_lossy(&fine.stdout));
    assert_eq!(code(&arclab(&["convergence", "--cells", "8,16,32", "--dt", "0.1"])), 1);
    assert_eq!(code(&arclab(&["convergence", "--cells", "8"])), 2);
}
