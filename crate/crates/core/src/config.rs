//! Experiment configuration, read from TOML.
//!
//! Every section is optional; missing keys fall back to the 1 x 5 x 3
//! test case (k = 1, step 0.1, 15 sensors, 10 x 50 x 30 grid).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bem::{BcKind, BcSpec, FaceCondition, Wavenumber};
use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, Face, LatticeCounts};
use crate::training::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub lengths: [f64; 3],
}

impl Default for DomainSection {
    fn default() -> Self {
        Self {
            lengths: [1.0, 5.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub step: f64,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { step: 0.1 }
    }
}

/// Per-face conditions; faces not listed take `default`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcSection {
    pub default: Option<FaceCondition>,
    pub faces: BTreeMap<String, FaceCondition>,
}

impl Default for BcSection {
    fn default() -> Self {
        let dirichlet = FaceCondition {
            kind: BcKind::Dirichlet,
            value: 1.0,
        };
        Self {
            default: Some(FaceCondition {
                kind: BcKind::Neumann,
                value: 1.0,
            }),
            faces: [("x+".to_string(), dirichlet), ("z-".to_string(), dirichlet)]
                .into_iter()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavenumberSection {
    pub k: f64,
}

impl Default for WavenumberSection {
    fn default() -> Self {
        Self { k: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorsSection {
    /// Sensor lattice counts per axis.
    pub counts: LatticeCounts,
    /// Evaluation grid counts per axis.
    pub grid: LatticeCounts,
}

impl Default for SensorsSection {
    fn default() -> Self {
        Self {
            counts: [1, 5, 3],
            grid: [10, 50, 30],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub wavenumbers: Vec<f64>,
    /// Sensor lattices; the defaults hold 15, 120 and 960 points.
    pub sensor_layouts: Vec<LatticeCounts>,
    pub hidden_widths: Vec<usize>,
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            wavenumbers: (0..=10).map(f64::from).collect(),
            sensor_layouts: vec![[1, 5, 3], [2, 10, 6], [4, 20, 12]],
            hidden_widths: vec![20, 40],
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Axis normal to the cross-section plane: "x", "y" or "z".
    pub slice_axis: String,
    pub slice_coord: f64,
    pub histogram_bins: usize,
    /// Histogram covers signed relative errors in `[-range, range]`, plus
    /// one underflow and one overflow bin.
    pub histogram_range: f64,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self {
            slice_axis: "z".into(),
            slice_coord: 1.5,
            histogram_bins: 100,
            histogram_range: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSection,
    pub mesh: MeshSection,
    pub bc: BcSection,
    pub wavenumber: WavenumberSection,
    pub sensors: SensorsSection,
    pub training: TrainConfig,
    pub sweep: SweepSection,
    pub report: ReportSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses and validates; semantic errors carry the line of the offending key.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate().map_err(|e| match e {
            Error::Config(msg) => Error::Config(anchor(text, &msg)),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        BoxDomain::from_lengths(self.domain.lengths).map_err(|_| cfg_err("domain", "lengths", "must be positive"))?;
        if !(self.mesh.step.is_finite() && self.mesh.step > 0.0) {
            return Err(cfg_err("mesh", "step", "must be positive"));
        }
        self.bc_spec()?;
        Wavenumber::new(self.wavenumber.k).map_err(|_| cfg_err("wavenumber", "k", "must be >= 0"))?;
        if self.sensors.counts.contains(&0) {
            return Err(cfg_err("sensors", "counts", "must all be >= 1"));
        }
        if self.sensors.grid.contains(&0) {
            return Err(cfg_err("sensors", "grid", "must all be >= 1"));
        }
        self.training.validate()?;
        let s = &self.sweep;
        if s.wavenumbers.is_empty() || s.wavenumbers.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(cfg_err("sweep", "wavenumbers", "must be a nonempty list of values >= 0"));
        }
        if s.sensor_layouts.is_empty() || s.sensor_layouts.iter().any(|c| c.contains(&0)) {
            return Err(cfg_err("sweep", "sensor_layouts", "must be a nonempty list of positive counts"));
        }
        if s.hidden_widths.is_empty() || s.hidden_widths.contains(&0) {
            return Err(cfg_err("sweep", "hidden_widths", "must be a nonempty list of positive widths"));
        }
        if s.workers == 0 {
            return Err(cfg_err("sweep", "workers", "must be >= 1"));
        }
        let r = &self.report;
        if !matches!(r.slice_axis.as_str(), "x" | "y" | "z") {
            return Err(cfg_err("report", "slice_axis", "must be x, y or z"));
        }
        if r.histogram_bins == 0 || r.histogram_range.is_nan() || r.histogram_range <= 0.0 {
            return Err(cfg_err("report", "histogram_bins", "bins and range must be positive"));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::from_lengths(self.domain.lengths)
    }

    pub fn wavenumber(&self) -> Result<Wavenumber> {
        Wavenumber::new(self.wavenumber.k)
    }

    pub fn bc_spec(&self) -> Result<BcSpec> {
        let mut faces = BTreeMap::new();
        for (label, cond) in &self.bc.faces {
            let face: Face = label
                .parse()
                .map_err(|_| cfg_err("bc.faces", label, "unknown face label (use x-, x+, y-, y+, z-, z+)"))?;
            faces.insert(face, *cond);
        }
        if let Some(default) = self.bc.default {
            for f in Face::ALL {
                faces.entry(f).or_insert(default);
            }
        }
        BcSpec::from_map(faces).map_err(|e| Error::Config(format!("[bc] {e}")))
    }

    pub fn slice_axis(&self) -> usize {
        match self.report.slice_axis.as_str() {
            "x" => 0,
            "y" => 1,
            _ => 2,
        }
    }
}

fn cfg_err(section: &str, key: &str, msg: &str) -> Error {
    Error::Config(format!("[{section}] {key}: {msg}"))
}

/// Appends the line number of `key` inside `[section]`, when it can be found.
fn anchor(text: &str, msg: &str) -> String {
    let Some(rest) = msg.strip_prefix('[') else {
        return msg.to_string();
    };
    let Some((section, tail)) = rest.split_once(']') else {
        return msg.to_string();
    };
    let key = tail.trim_start().split(':').next().unwrap_or("").trim();
    let mut in_section = false;
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_section = t.trim_matches(|c| c == '[' || c == ']').trim() == section;
            continue;
        }
        let lhs = t.split('=').next().unwrap_or("").trim().trim_matches('"');
        if in_section && lhs == key {
            return format!("line {}: {msg}", n + 1);
        }
    }
    msg.to_string()
}
