mod common;

use std::fs;
use std::path::Path;

use bemnet::experiments::{
    cmd_fit_bound, cmd_generate, cmd_nyquist, cmd_reconstruct, cmd_sweep, cmd_train, nyquist_check,
    resolve_selected, NyquistOverrides, SweepStatus,
};
use bemnet::persistence::{dataset_files, load_checkpoint};
use bemnet::Error;
use proptest::prelude::*;

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = walk(dir)
        .into_iter()
        .filter(|p| !p.ends_with("training_summary.csv") && !p.to_string_lossy().contains("records"))
        .map(|p| (p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(walk(&p));
        } else {
            v.push(p);
        }
    }
    v
}

#[test]
fn generate_and_train_are_reproducible() {
    let cfg = common::tiny_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        cmd_generate(&cfg, d.path()).unwrap();
        cmd_train(&cfg, d.path(), d.path(), false, 2).unwrap();
    }
    let (fa, fb) = (files_in(a.path()), files_in(b.path()));
    assert!(fa.iter().any(|(n, _)| n.starts_with("checkpoints")));
    assert_eq!(fa, fb);
}

#[test]
fn train_writes_one_record_per_seed_and_resumes() {
    let mut cfg = common::tiny_config();
    cfg.training.seeds = vec![3, 1, 2];
    let dir = tempfile::tempdir().unwrap();
    cmd_generate(&cfg, dir.path()).unwrap();
    let first = cmd_train(&cfg, dir.path(), dir.path(), false, 1).unwrap();
    assert_eq!(first.records.len(), 3);
    assert!(first.reused.is_empty());
    for s in [1, 2, 3] {
        assert!(dir.path().join(format!("history/seed_{s}.csv")).exists());
    }
    let best = first
        .records
        .iter()
        .map(|r| r.best_val_loss)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(first.selected.best_val_loss, best);
    let ck = load_checkpoint(&resolve_selected(dir.path()).unwrap()).unwrap();
    assert_eq!(ck.meta.seed, first.selected.seed);

    let again = cmd_train(&cfg, dir.path(), dir.path(), true, 1).unwrap();
    assert_eq!(again.reused, vec![3, 1, 2]);
    assert_eq!(again.selected, first.selected);
    for (x, y) in again.records.iter().zip(&first.records) {
        assert_eq!((x.seed, &x.val_loss, x.best_epoch), (y.seed, &y.val_loss, y.best_epoch));
    }
}

#[test]
fn duplicated_seeds_give_identical_runs() {
    let mut cfg = common::tiny_config();
    cfg.training.seeds = vec![7, 7];
    let dir = tempfile::tempdir().unwrap();
    cmd_generate(&cfg, dir.path()).unwrap();
    let s = cmd_train(&cfg, dir.path(), dir.path(), false, 2).unwrap();
    assert_eq!(s.records[0].val_loss, s.records[1].val_loss);
    assert_eq!(s.selected.seed, 7);
}

#[test]
fn missing_dataset_leaves_no_output() {
    let cfg = common::tiny_config();
    let data = tempfile::tempdir().unwrap();
    cmd_generate(&cfg, data.path()).unwrap();
    fs::remove_file(&dataset_files(data.path())[2]).unwrap();
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("run");
    let err = cmd_train(&cfg, data.path(), &out, false, 1).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!out.exists());
}

#[test]
fn reconstruction_report_is_consistent() {
    let cfg = common::tiny_config();
    let dir = tempfile::tempdir().unwrap();
    cmd_generate(&cfg, dir.path()).unwrap();
    cmd_train(&cfg, dir.path(), dir.path(), false, 1).unwrap();
    let out = dir.path().join("reconstruction");
    let r = cmd_reconstruct(&cfg, dir.path(), &resolve_selected(dir.path()).unwrap(), &out).unwrap();
    let s = &r.summary;
    assert_eq!(s.points, 64);
    assert_eq!(s.evaluable + s.below_floor, s.points);
    assert!((0.0..=1.0).contains(&s.fraction_within_tolerance));
    let mass: f64 = r.histogram.iter().map(|b| b.mass).sum();
    assert!((mass - 1.0).abs() <= 1e-12);
    assert_eq!(r.histogram.len(), cfg.report.histogram_bins + 2);
    // Grid spacing 0.25 on z; plane 0.5 sits between two layers.
    assert_eq!(r.slice.len(), 32);
    assert!(r.slice.iter().all(|&i| (r.points[i][2] - 0.5).abs() <= 0.125 + 1e-9));
    for f in ["points.csv", "histogram.csv", "slice.csv", "summary.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let rows = fs::read_to_string(out.join("points.csv")).unwrap().lines().count();
    assert_eq!(rows, 65);
}

#[test]
fn sweep_emits_one_row_per_cell_and_resumes_without_recomputing() {
    let cfg = common::tiny_config();
    let dir = tempfile::tempdir().unwrap();
    let rows = cmd_sweep(&cfg, dir.path(), 2).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.status == SweepStatus::Ok && r.testing_mse.is_finite()));
    assert_eq!(rows[0].cell.k, 0.0);

    // A completed cell is never touched again, even if its inputs vanish.
    let cell = dir.path().join("cells").join(rows[1].cell.dir_name());
    fs::remove_dir_all(cell.join("dataset")).unwrap();
    let table = fs::read(dir.path().join("sweep.csv")).unwrap();
    let again = cmd_sweep(&cfg, dir.path(), 1).unwrap();
    assert_eq!(again, rows);
    assert!(!cell.join("dataset").exists());
    assert_eq!(fs::read(dir.path().join("sweep.csv")).unwrap(), table);

    let fit = cmd_fit_bound(&dir.path().join("sweep.csv"), Some(8), Some(4), Some(dir.path())).unwrap();
    assert!(fit.c1 >= 0.0 && fit.c2 >= 0.0 && fit.samples == 3);
    assert!(matches!(
        cmd_fit_bound(&dir.path().join("sweep.csv"), Some(15), None, None),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn failed_cell_is_recorded_and_sweep_continues() {
    let mut cfg = common::tiny_config();
    // A single sensor cannot be split into training and validation sets.
    cfg.sweep.sensor_layouts = vec![[1, 1, 1], [2, 2, 2]];
    cfg.sweep.wavenumbers = vec![1.0];
    let dir = tempfile::tempdir().unwrap();
    let rows = cmd_sweep(&cfg, dir.path(), 1).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].status, SweepStatus::Failed);
    assert!(rows[0].message.contains("sensor"), "{}", rows[0].message);
    assert_eq!(rows[1].status, SweepStatus::Ok);
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| l.contains(",failed,")).count(), 1);
}

#[test]
fn nyquist_reference_values() {
    let cfg = bemnet::config::ExperimentConfig::default();
    let r = cmd_nyquist(
        &cfg,
        NyquistOverrides {
            delta_r: Some(0.1),
            k_max: Some(10.0),
        },
        None,
    )
    .unwrap();
    assert!(r.pass);
    assert!((r.spacing_bound - std::f64::consts::PI / 10.0).abs() <= 1e-12);
    assert!((r.k_sampling - 2.0 * std::f64::consts::PI / 0.1).abs() <= 1e-12);
    let fail = cmd_nyquist(
        &cfg,
        NyquistOverrides {
            delta_r: Some(0.1),
            k_max: Some(40.0),
        },
        None,
    )
    .unwrap();
    assert!(!fail.pass);
}

proptest! {
    #[test]
    fn nyquist_arithmetic_is_exact(dr in 1e-4f64..10.0, k in 1e-3f64..100.0) {
        let (bound, ks, pass) = nyquist_check(dr, k);
        prop_assert_eq!(bound, std::f64::consts::PI / k);
        prop_assert_eq!(ks, 2.0 * std::f64::consts::PI / dr);
        prop_assert_eq!(pass, dr <= std::f64::consts::PI / k);
    }
}
