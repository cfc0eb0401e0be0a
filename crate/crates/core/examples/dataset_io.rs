//! Writes a small dataset, reads it back, and shows what the loader rejects.
//!
//! ```text
//! cargo run --example dataset_io -- [dir]
//! ```

use std::path::PathBuf;

use bemnet::config::ExperimentConfig;
use bemnet::experiments::cmd_generate;
use bemnet::persistence::{load_dataset, SENSORS_FILE};

fn main() -> bemnet::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "run-dataset-io".into()));
    let mut cfg = ExperimentConfig::default();
    cfg.mesh.step = 0.5;
    cfg.sensors.grid = [2, 10, 6];

    let manifest = cmd_generate(&cfg, &dir)?;
    for (file, sum) in &manifest.checksums {
        println!("{file:<14} sha256 {sum}");
    }
    let bundle = load_dataset(&dir)?;
    println!(
        "reloaded {} elements, {} sensors, {} grid points",
        bundle.mesh.len(),
        bundle.sensors.len(),
        bundle.grid.len()
    );

    // Any edit to a data file is caught by its checksum.
    let path = dir.join(SENSORS_FILE);
    let original = std::fs::read_to_string(&path).map_err(|e| bemnet::Error::Config(e.to_string()))?;
    std::fs::write(&path, original.replacen('1', "2", 1)).map_err(|e| bemnet::Error::Config(e.to_string()))?;
    println!("after editing {SENSORS_FILE}: {}", load_dataset(&dir).unwrap_err());
    std::fs::write(&path, original).map_err(|e| bemnet::Error::Config(e.to_string()))?;
    Ok(())
}
