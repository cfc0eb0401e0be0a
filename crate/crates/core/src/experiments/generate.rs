use std::collections::BTreeMap;
use std::path::Path;

use crate::bem::generate_dataset;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::persistence::{save_dataset, DatasetBundle, DatasetManifest, DATASET_FORMAT_VERSION};

pub fn generator_version() -> String {
    format!("bemnet {}", env!("CARGO_PKG_VERSION"))
}

/// Solves the configured problem and writes a dataset directory.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    let data = generate_dataset(
        cfg.domain()?,
        cfg.mesh.step,
        cfg.wavenumber()?,
        &cfg.bc_spec()?,
        cfg.sensors.counts,
        cfg.sensors.grid,
    )?;
    let manifest = DatasetManifest {
        format_version: DATASET_FORMAT_VERSION,
        generator: generator_version(),
        wavenumber: cfg.wavenumber.k,
        domain: cfg.domain.lengths,
        step: cfg.mesh.step,
        elements: data.mesh.len(),
        sensor_counts: cfg.sensors.counts,
        grid_counts: cfg.sensors.grid,
        condition_estimate: data.condition,
        checksums: BTreeMap::new(),
        config: cfg.clone(),
    };
    save_dataset(
        out,
        &DatasetBundle {
            manifest,
            mesh: data.mesh,
            boundary: data.boundary,
            sensors: data.sensors,
            grid: data.grid,
        },
    )
}
