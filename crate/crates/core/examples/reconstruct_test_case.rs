//! The full pipeline on the test case at desk scale: generate the dataset,
//! train one model per seed, reconstruct the 10 x 50 x 30 grid.
//!
//! ```text
//! cargo run --release --example reconstruct_test_case -- <out dir> [max epochs] [seeds]
//! ```
//!
//! Defaults: `run-test-case`, 5000 epochs, seeds 0,1,2,3,4.

use std::path::PathBuf;

use bemnet::config::ExperimentConfig;
use bemnet::experiments::{cmd_generate, cmd_reconstruct, cmd_train, resolve_selected};

fn main() -> bemnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "run-test-case".into()));
    let mut cfg = ExperimentConfig::default();
    cfg.mesh.step = 0.25;
    if let Some(e) = args.next() {
        cfg.training.max_epochs = e.parse().expect("max epochs");
        cfg.training.patience = cfg.training.patience.min(cfg.training.max_epochs - 1);
    }
    if let Some(s) = args.next() {
        cfg.training.seeds = s.split(',').map(|v| v.parse().expect("seed")).collect();
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let m = cmd_generate(&cfg, &out)?;
    println!("dataset: {} elements, condition {:.2e}", m.elements, m.condition_estimate);

    let s = cmd_train(&cfg, &out, &out, true, workers)?;
    for r in &s.records {
        println!(
            "seed {}: best val loss {:.4e} at epoch {} of {} ({:.0} s)",
            r.seed,
            r.best_val_loss,
            r.best_epoch,
            r.epochs(),
            r.wall_time_s
        );
    }

    let report = cmd_reconstruct(&cfg, &out, &resolve_selected(&out)?, &out.join("reconstruction"))?;
    let r = &report.summary;
    println!(
        "selected seed {}: {:.1}% of grid points within ±5%, median signed error {:.3e}",
        s.selected.seed,
        100.0 * r.fraction_within_tolerance,
        r.median
    );
    println!("histogram, slice and per-point CSVs in {}", out.join("reconstruction").display());
    Ok(())
}
