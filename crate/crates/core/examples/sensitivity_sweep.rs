//! A reduced sensitivity sweep: k in {0, 1, 2, 4}, 15 and 120 sensors,
//! width 20, with short training so it finishes in minutes.
//!
//! ```text
//! cargo run --release --example sensitivity_sweep -- [out dir] [max epochs]
//! ```
//!
//! Rerunning with the same directory skips completed cells.

use std::path::PathBuf;

use bemnet::config::ExperimentConfig;
use bemnet::experiments::{cmd_sweep, monotonic_in_k, SweepStatus};

fn main() -> bemnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "run-sweep".into()));
    let epochs: usize = args.next().map_or(300, |s| s.parse().expect("epochs"));

    let mut cfg = ExperimentConfig::default();
    cfg.mesh.step = 0.25;
    cfg.training.max_epochs = epochs;
    cfg.training.patience = (epochs / 4).max(1);
    cfg.training.seeds = vec![0, 1];
    cfg.sweep.wavenumbers = vec![0.0, 1.0, 2.0, 4.0];
    cfg.sweep.sensor_layouts = vec![[1, 5, 3], [2, 10, 6]];
    cfg.sweep.hidden_widths = vec![20];
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let rows = cmd_sweep(&cfg, &out, workers)?;
    println!("{:>4} {:>8} {:>6} {:>12} {:>12}", "k", "sensors", "width", "val loss", "test loss");
    for r in &rows {
        match r.status {
            SweepStatus::Ok => println!(
                "{:>4} {:>8} {:>6} {:>12.4e} {:>12.4e}",
                r.cell.k,
                r.sensors(),
                r.cell.width,
                r.best_val_loss,
                r.testing_mse
            ),
            SweepStatus::Failed => println!("{:>4} {:>8} {:>6} failed: {}", r.cell.k, r.sensors(), r.cell.width, r.message),
        }
    }
    for d in monotonic_in_k(&rows, 0.0, 4.0) {
        println!(
            "{} sensors: monotonic in k = {}, error(k=4) > error(k=0) = {}",
            d.sensors, d.monotonic, d.endpoint_increase
        );
    }
    Ok(())
}
