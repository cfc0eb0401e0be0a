use std::f64::consts::PI;
use std::path::Path;

use super::csv;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry::lattice_spacing;
use crate::persistence::write_atomic;

/// Values that replace the ones derived from the configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NyquistOverrides {
    pub delta_r: Option<f64>,
    pub k_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NyquistReport {
    pub k_max: f64,
    /// Collocation spacing (the mesh step).
    pub delta_r_collocation: f64,
    /// Largest spacing of the evaluation grid.
    pub delta_r_grid: f64,
    /// Largest spacing of the sensor lattice; reported, not part of the verdict.
    pub delta_r_sensors: f64,
    /// Spacing the verdict is based on.
    pub delta_r_max: f64,
    /// `π / k_max`, the largest spacing that resolves `k_max`.
    pub spacing_bound: f64,
    /// `2π / Δr_max`, the sampling wavenumber of the lattice.
    pub k_sampling: f64,
    /// `2 k_max`, the sampling wavenumber required.
    pub k_sampling_required: f64,
    pub pass: bool,
}

/// `(π/k_max, 2π/Δr, Δr ≤ π/k_max)`.
pub fn nyquist_check(delta_r_max: f64, k_max: f64) -> (f64, f64, bool) {
    let bound = PI / k_max;
    (bound, 2.0 * PI / delta_r_max, delta_r_max <= bound)
}

/// Checks that the collocation mesh and the evaluation grid sample the
/// highest swept wavenumber without aliasing.
pub fn cmd_nyquist(cfg: &ExperimentConfig, overrides: NyquistOverrides, out: Option<&Path>) -> Result<NyquistReport> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let max_of = |s: [f64; 3]| s.into_iter().fold(0.0, f64::max);
    let delta_r_collocation = cfg.mesh.step;
    let delta_r_grid = max_of(lattice_spacing(&domain, cfg.sensors.grid));
    let delta_r_sensors = max_of(lattice_spacing(&domain, cfg.sensors.counts));
    let delta_r_max = overrides.delta_r.unwrap_or(delta_r_collocation.max(delta_r_grid));
    let k_max = overrides
        .k_max
        .unwrap_or_else(|| cfg.sweep.wavenumbers.iter().copied().fold(cfg.wavenumber.k, f64::max));
    if !(delta_r_max.is_finite() && delta_r_max > 0.0) {
        return Err(Error::Config(format!("spacing must be positive, got {delta_r_max}")));
    }
    if !(k_max.is_finite() && k_max >= 0.0) {
        return Err(Error::Config(format!("k_max must be >= 0, got {k_max}")));
    }
    let (spacing_bound, k_sampling, pass) = nyquist_check(delta_r_max, k_max);
    let report = NyquistReport {
        k_max,
        delta_r_collocation,
        delta_r_grid,
        delta_r_sensors,
        delta_r_max,
        spacing_bound,
        k_sampling,
        k_sampling_required: 2.0 * k_max,
        pass,
    };
    if let Some(dir) = out {
        write_atomic(&dir.join("nyquist.csv"), report.to_csv().as_bytes())?;
    }
    Ok(report)
}

impl NyquistReport {
    pub fn to_csv(&self) -> String {
        let rows = [
            ("k_max", self.k_max),
            ("delta_r_collocation", self.delta_r_collocation),
            ("delta_r_grid", self.delta_r_grid),
            ("delta_r_sensors", self.delta_r_sensors),
            ("delta_r_max", self.delta_r_max),
            ("spacing_bound", self.spacing_bound),
            ("k_sampling", self.k_sampling),
            ("k_sampling_required", self.k_sampling_required),
        ];
        csv(
            "quantity,value",
            rows.iter()
                .map(|(n, v)| format!("{n},{v}"))
                .chain([format!("verdict,{}", if self.pass { "PASS" } else { "FAIL" })]),
        )
    }
}
