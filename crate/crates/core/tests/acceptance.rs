//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs the full desk-scale sweep (5 wavenumbers x 5 seeds, up to 5000
//! epochs each), so expect about an hour on a single core. Artifacts land in
//! `$CARGO_TARGET_TMPDIR/acceptance`. `BEMNET_ACCEPTANCE_RESUME=1` reuses
//! finished sweep cells from a previous run; `BEMNET_ACCEPTANCE_STRICT=1`
//! turns any FAIL into a nonzero exit.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use bemnet::config::ExperimentConfig;
use bemnet::experiments::{
    cmd_generate, cmd_nyquist, cmd_sweep, cmd_train, monotonic_in_k, NyquistOverrides, ReconstructionSummary,
    SweepRow, SweepStatus,
};
use bemnet::geometry::{build_box_mesh, evaluation_grid, BoxDomain};
use bemnet::model::loss;

struct Tally {
    passed: usize,
    failed: usize,
}

impl Tally {
    fn report(&mut self, id: u32, pass: bool, detail: String) {
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!("criterion {id}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn acceptance_config(workers: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.mesh.step = 0.25;
    cfg.sweep.wavenumbers = vec![0.0, 1.0, 2.0, 3.0, 4.0];
    cfg.sweep.sensor_layouts = vec![[1, 5, 3]];
    cfg.sweep.hidden_widths = vec![20];
    cfg.sweep.workers = workers;
    cfg
}

fn tree_bytes(dir: &Path, skip: &[&str]) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            let rel = p.strip_prefix(dir).unwrap().display().to_string();
            if skip.iter().any(|s| rel.starts_with(s)) {
                continue;
            }
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn main() {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut tally = Tally { passed: 0, failed: 0 };
    println!("acceptance run on {cores} core(s)");

    // 1. Mesh and grid counts.
    let t = Instant::now();
    let d = BoxDomain::test_case();
    let elements = build_box_mesh(d, 0.1).map(|m| m.len()).unwrap_or(0);
    let grid = evaluation_grid(&d, [10, 50, 30]).map(|g| g.len()).unwrap_or(0);
    let dt = secs(t);
    tally.report(
        1,
        elements == 4600 && grid == 15_000 && dt < 1.0,
        format!("{elements} elements, {grid} grid points, {dt:.3} s"),
    );

    // 2. Oracle correctness.
    let t = Instant::now();
    let e = common::plane_wave_errors(1.0, &[0.5, 0.25, 0.125]);
    let dev = common::laplace_constant_deviation(0.25);
    let dt = secs(t);
    tally.report(
        2,
        e[0] > e[1] && e[1] > e[2] && e[2] <= 0.01 && dev <= 0.02 && dt < 120.0,
        format!(
            "plane-wave relative RMS {:.3e} / {:.3e} / {:.3e} (h = 0.5/0.25/0.125, limit 1e-2); \
             Laplace max |u - 1| = {dev:.3e} (limit 2e-2); {dt:.1} s",
            e[0], e[1], e[2]
        ),
    );

    // 3. Gradient integrity.
    let t = Instant::now();
    let g = common::loss_gradient_check();
    let dt = secs(t);
    tally.report(
        3,
        g.checked >= 100 && g.max_relative_error < 1e-4 && dt < 30.0,
        format!(
            "{} coordinates, max relative error {:.2e} (limit 1e-4), {dt:.2} s",
            g.checked, g.max_relative_error
        ),
    );

    // 4. Exact kernels reproduce the representation sum.
    let t = Instant::now();
    let gap = common::oracle_substitution_gap(1.0, 0.25);
    let dt = secs(t);
    tally.report(
        4,
        gap <= 1e-12 && dt < 10.0,
        format!("max relative difference {gap:.2e} (limit 1e-12), {dt:.2} s"),
    );

    // 5 and 6 share one sweep: its k = 1 cell is the desk-scale reconstruction run.
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let sweep_dir = root.join("sweep");
    if std::env::var_os("BEMNET_ACCEPTANCE_RESUME").is_none() {
        let _ = fs::remove_dir_all(&sweep_dir);
    }
    let cfg = acceptance_config(cores);
    let t = Instant::now();
    let rows = cmd_sweep(&cfg, &sweep_dir, cores).unwrap_or_default();
    let sweep_time = secs(t);
    let find = |k: f64| -> Option<&SweepRow> {
        rows.iter().find(|r| r.cell.k == k && r.status == SweepStatus::Ok)
    };

    match find(1.0) {
        Some(row) => {
            let summary_path = sweep_dir
                .join("cells")
                .join(row.cell.dir_name())
                .join("reconstruction/summary.toml");
            let summary: ReconstructionSummary =
                toml::from_str(&fs::read_to_string(summary_path).unwrap()).unwrap();
            let frac = summary.fraction_within_tolerance;
            tally.report(
                5,
                frac >= 0.8 && row.wall_time_s <= 900.0,
                format!(
                    "{} of {} evaluable points within ±5% = {frac:.4} (target 0.80); median signed error {:.3e}; \
                     selected seed {:?}; cell wall time {:.0} s on {cores} core(s) (limit 900 s)",
                    summary.within_tolerance,
                    summary.evaluable,
                    summary.median,
                    row.selected_seed,
                    row.wall_time_s
                ),
            );
        }
        None => tally.report(5, false, "k = 1 sweep cell did not complete".into()),
    }

    match (find(0.0), find(4.0)) {
        (Some(r0), Some(r4)) => {
            let diag = monotonic_in_k(&rows, 0.0, 4.0);
            let series: Vec<String> = rows
                .iter()
                .map(|r| format!("k={}: {:.4e}", r.cell.k, r.testing_mse))
                .collect();
            tally.report(
                6,
                r4.testing_mse > r0.testing_mse && sweep_time <= 75.0 * 60.0,
                format!(
                    "testing MSE {} ; k=4 > k=0: {}; per-step monotonic: {}; sweep {:.1} min (limit 75)",
                    series.join(", "),
                    r4.testing_mse > r0.testing_mse,
                    diag.first().is_some_and(|d| d.monotonic),
                    sweep_time / 60.0
                ),
            );
        }
        _ => tally.report(
            6,
            false,
            format!(
                "sweep cells failed: {}",
                rows.iter()
                    .filter(|r| r.status == SweepStatus::Failed)
                    .map(|r| format!("k={}: {}", r.cell.k, r.message))
                    .collect::<Vec<_>>()
                    .join("; ")
            ),
        ),
    }

    // 7. Sampling arithmetic.
    let t = Instant::now();
    let ny = cmd_nyquist(
        &ExperimentConfig::default(),
        NyquistOverrides {
            delta_r: Some(0.1),
            k_max: Some(10.0),
        },
        None,
    )
    .unwrap();
    let dt = secs(t);
    tally.report(
        7,
        ny.pass
            && (ny.spacing_bound - PI / 10.0).abs() <= 1e-12
            && (ny.k_sampling - 2.0 * PI / 0.1).abs() <= 1e-12
            && dt < 1.0,
        format!(
            "verdict {}, bound {:.15}, k_sampling {:.12}, {dt:.4} s",
            if ny.pass { "PASS" } else { "FAIL" },
            ny.spacing_bound,
            ny.k_sampling
        ),
    );

    // 8. Reruns are byte-identical.
    let mut det = acceptance_config(cores);
    det.training.max_epochs = 20;
    det.training.patience = 10;
    det.training.seeds = vec![0, 1];
    let runs: Vec<_> = ["det_a", "det_b"]
        .iter()
        .map(|name| {
            let dir = root.join(name);
            let _ = fs::remove_dir_all(&dir);
            cmd_generate(&det, &dir).unwrap();
            cmd_train(&det, &dir, &dir, false, cores).unwrap();
            // Records and the summary table carry wall times by design.
            tree_bytes(&dir, &["records", "training_summary.csv"])
        })
        .collect();
    let n_ckpt = runs[0].iter().filter(|(n, _)| n.starts_with("checkpoints")).count();
    tally.report(
        8,
        runs[0] == runs[1] && n_ckpt == 2,
        format!("{} files compared ({n_ckpt} checkpoints), identical: {}", runs[0].len(), runs[0] == runs[1]),
    );

    // 9. Loss formula.
    let l = loss(&[0.1; 4], &[0.0; 4]).unwrap();
    tally.report(9, l == 0.05, format!("loss = {l:?} (expected 0.05)"));

    println!("acceptance: {} passed, {} failed", tally.passed, tally.failed);
    if tally.failed > 0 && std::env::var_os("BEMNET_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
