//! On-disk formats.
//!
//! A dataset directory holds
//!
//! | file            | columns                                   |
//! |-----------------|-------------------------------------------|
//! | `boundary.csv`  | `face,cx,cy,cz,nx,ny,nz,area,u,q`         |
//! | `sensors.csv`   | `x,y,z,u`                                 |
//! | `grid.csv`      | `x,y,z,u_ref`                             |
//! | `manifest.toml` | config echo, mesh stats, SHA-256 of the CSVs |
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. Checkpoints and training records are JSON; histories are
//! CSV (`epoch,train_loss,val_loss`). Every file is written to a temporary
//! sibling and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bem::RealCauchy;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryElement, BoundaryMesh, BoxDomain, Face, LatticeCounts, PointSet};
use crate::model::{GreensNetModel, Normalization};
use crate::nn::DenseStack;
use crate::training::{StopReason, TrainingRecord};

pub const DATASET_FORMAT_VERSION: u32 = 1;
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

pub const BOUNDARY_FILE: &str = "boundary.csv";
pub const SENSORS_FILE: &str = "sensors.csv";
pub const GRID_FILE: &str = "grid.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

const BOUNDARY_HEADER: [&str; 10] = ["face", "cx", "cy", "cz", "nx", "ny", "nz", "area", "u", "q"];
const SENSORS_HEADER: [&str; 4] = ["x", "y", "z", "u"];
const GRID_HEADER: [&str; 4] = ["x", "y", "z", "u_ref"];
const HISTORY_HEADER: [&str; 3] = ["epoch", "train_loss", "val_loss"];

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes through a temporary sibling, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Minimal CSV table of numeric columns with an optional leading label.
struct CsvTable<'a> {
    path: &'a Path,
    header: &'a [&'a str],
    rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> CsvTable<'a> {
    fn parse(path: &'a Path, text: &'a str, header: &'a [&'a str]) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let found = lines.next().map(|(_, l)| l).unwrap_or("");
        if found.split(',').collect::<Vec<_>>() != header {
            return Err(Error::SchemaMismatch {
                file: path.to_path_buf(),
                line: 1,
                column: "header".into(),
                reason: format!("expected `{}`, found `{found}`", header.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(Error::SchemaMismatch {
                    file: path.to_path_buf(),
                    line: n + 1,
                    column: "*".into(),
                    reason: format!("expected {} fields, found {}", header.len(), fields.len()),
                });
            }
            rows.push((n + 1, fields));
        }
        Ok(Self { path, header, rows })
    }

    fn real(&self, row: usize, col: usize) -> Result<f64> {
        let (line, fields) = &self.rows[row];
        fields[col]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::SchemaMismatch {
                file: self.path.to_path_buf(),
                line: *line,
                column: self.header[col].to_string(),
                reason: format!("`{}` is not a finite real", fields[col]),
            })
    }

    fn reals(&self, row: usize, cols: std::ops::Range<usize>) -> Result<Vec<f64>> {
        cols.map(|c| self.real(row, c)).collect()
    }
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub generator: String,
    pub wavenumber: f64,
    pub domain: [f64; 3],
    pub step: f64,
    pub elements: usize,
    pub sensor_counts: LatticeCounts,
    pub grid_counts: LatticeCounts,
    pub condition_estimate: f64,
    /// SHA-256 of each CSV file, keyed by file name.
    pub checksums: BTreeMap<String, String>,
    pub config: ExperimentConfig,
}

/// Everything `generate` writes and `train`/`reconstruct` read back.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub manifest: DatasetManifest,
    pub mesh: BoundaryMesh,
    pub boundary: RealCauchy,
    pub sensors: PointSet,
    pub grid: PointSet,
}

fn points_csv(header: &[&str], set: &PointSet) -> Result<String> {
    let values = set
        .values
        .as_ref()
        .ok_or_else(|| Error::ShapeMismatch("point set has no values to save".into()))?;
    Ok(csv_text(
        header,
        set.points.iter().zip(values).map(|(p, v)| {
            vec![fmt_real(p[0]), fmt_real(p[1]), fmt_real(p[2]), fmt_real(*v)]
        }),
    ))
}

fn boundary_csv(mesh: &BoundaryMesh, cauchy: &RealCauchy) -> String {
    csv_text(
        &BOUNDARY_HEADER,
        mesh.elements.iter().zip(&cauchy.u).zip(&cauchy.q).map(|((e, u), q)| {
            let mut row = vec![e.face.label().to_string()];
            row.extend(e.centroid.iter().chain(&e.normal).map(|v| fmt_real(*v)));
            row.extend([fmt_real(e.area), fmt_real(*u), fmt_real(*q)]);
            row
        }),
    )
}

/// Writes the three CSVs and the manifest; checksums in `bundle.manifest`
/// are recomputed from the written content.
pub fn save_dataset(dir: &Path, bundle: &DatasetBundle) -> Result<DatasetManifest> {
    if bundle.boundary.len() != bundle.mesh.len() {
        return Err(Error::ShapeMismatch("boundary data and mesh differ in length".into()));
    }
    let files = [
        (BOUNDARY_FILE, boundary_csv(&bundle.mesh, &bundle.boundary)),
        (SENSORS_FILE, points_csv(&SENSORS_HEADER, &bundle.sensors)?),
        (GRID_FILE, points_csv(&GRID_HEADER, &bundle.grid)?),
    ];
    let mut manifest = bundle.manifest.clone();
    manifest.checksums.clear();
    for (name, text) in &files {
        manifest.checksums.insert(name.to_string(), sha256_hex(text.as_bytes()));
        write_atomic(&dir.join(name), text.as_bytes())?;
    }
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

/// Paths `load_dataset` needs, so callers can check for them up front.
pub fn dataset_files(dir: &Path) -> [PathBuf; 4] {
    [MANIFEST_FILE, BOUNDARY_FILE, SENSORS_FILE, GRID_FILE].map(|f| dir.join(f))
}

pub fn load_dataset(dir: &Path) -> Result<DatasetBundle> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: DatasetManifest = toml::from_str(&read(&manifest_path)?).map_err(|e| Error::Parse {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    if manifest.format_version != DATASET_FORMAT_VERSION {
        return Err(Error::VersionUnsupported {
            found: manifest.format_version,
            expected: DATASET_FORMAT_VERSION,
        });
    }
    let domain = BoxDomain::from_lengths(manifest.domain)?;

    let mut texts = BTreeMap::new();
    for name in [BOUNDARY_FILE, SENSORS_FILE, GRID_FILE] {
        let path = dir.join(name);
        let text = read(&path)?;
        match manifest.checksums.get(name) {
            Some(sum) if *sum == sha256_hex(text.as_bytes()) => {}
            _ => return Err(Error::ChecksumMismatch(path)),
        }
        texts.insert(name, (path, text));
    }

    let (bpath, btext) = &texts[BOUNDARY_FILE];
    let table = CsvTable::parse(bpath, btext, &BOUNDARY_HEADER)?;
    let mut elements = Vec::with_capacity(table.rows.len());
    let mut boundary = RealCauchy {
        u: Vec::with_capacity(table.rows.len()),
        q: Vec::with_capacity(table.rows.len()),
    };
    for r in 0..table.rows.len() {
        let (line, fields) = &table.rows[r];
        let face: Face = fields[0].parse().map_err(|_| Error::SchemaMismatch {
            file: bpath.clone(),
            line: *line,
            column: "face".into(),
            reason: format!("unknown face `{}`", fields[0]),
        })?;
        let v = table.reals(r, 1..10)?;
        elements.push(BoundaryElement {
            centroid: [v[0], v[1], v[2]],
            normal: [v[3], v[4], v[5]],
            area: v[6],
            face,
        });
        boundary.u.push(v[7]);
        boundary.q.push(v[8]);
    }
    if elements.len() != manifest.elements {
        return Err(Error::SchemaMismatch {
            file: bpath.clone(),
            line: elements.len() + 1,
            column: "*".into(),
            reason: format!("manifest declares {} elements, file has {}", manifest.elements, elements.len()),
        });
    }

    let load_points = |name: &str, header: &'static [&'static str]| -> Result<PointSet> {
        let (path, text) = &texts[name];
        let t = CsvTable::parse(path, text, header)?;
        let mut points = Vec::with_capacity(t.rows.len());
        let mut values = Vec::with_capacity(t.rows.len());
        for r in 0..t.rows.len() {
            let v = t.reals(r, 0..4)?;
            points.push([v[0], v[1], v[2]]);
            values.push(v[3]);
        }
        let set = PointSet::with_values(points, values)?;
        set.validate_in(&domain)?;
        Ok(set)
    };
    let sensors = load_points(SENSORS_FILE, &SENSORS_HEADER)?;
    let grid = load_points(GRID_FILE, &GRID_HEADER)?;

    Ok(DatasetBundle {
        mesh: BoundaryMesh {
            domain,
            elements,
            step: manifest.step,
        },
        boundary,
        sensors,
        grid,
        manifest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// `[out, in]`
    pub shape: [usize; 2],
    /// Row-major `out x in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackParams {
    pub layers: Vec<LayerParams>,
}

impl StackParams {
    fn from_stack(stack: &DenseStack) -> Self {
        Self {
            layers: stack
                .weights()
                .iter()
                .zip(stack.biases())
                .map(|(w, b)| LayerParams {
                    shape: [w.nrows(), w.ncols()],
                    weights: w.iter().copied().collect(),
                    bias: b.to_vec(),
                })
                .collect(),
        }
    }

    fn to_stack(&self, declared: &[usize]) -> Result<DenseStack> {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            let [out, inp] = layer.shape;
            if layer.weights.len() != out * inp || layer.bias.len() != out {
                return Err(Error::ShapeMismatch(format!(
                    "layer {l}: declared {out}x{inp}, stored {} weights and {} biases",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            weights.push(
                Array2::from_shape_vec((out, inp), layer.weights.clone())
                    .map_err(|e| Error::ShapeMismatch(e.to_string()))?,
            );
            biases.push(Array1::from(layer.bias.clone()));
        }
        let stack = DenseStack::from_parts(weights, biases)?;
        if stack.sizes() != declared {
            return Err(Error::ShapeMismatch(format!(
                "declared layer sizes {declared:?}, stored {:?}",
                stack.sizes()
            )));
        }
        Ok(stack)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stop_reason: StopReason,
    pub wavenumber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: GreensNetModel,
    pub meta: CheckpointMeta,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    hidden_width: usize,
    layer_sizes: Vec<usize>,
    normalization: Normalization,
    g_stack: StackParams,
    dgdn_stack: StackParams,
    metadata: CheckpointMeta,
}

pub fn checkpoint_to_string(ckpt: &Checkpoint) -> String {
    let file = CheckpointFile {
        format_version: CHECKPOINT_FORMAT_VERSION,
        hidden_width: ckpt.model.hidden_width(),
        layer_sizes: ckpt.model.g_stack.sizes().to_vec(),
        normalization: ckpt.model.normalization,
        g_stack: StackParams::from_stack(&ckpt.model.g_stack),
        dgdn_stack: StackParams::from_stack(&ckpt.model.dgdn_stack),
        metadata: ckpt.meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("checkpoint serializes");
    s.push('\n');
    s
}

pub fn checkpoint_from_str(path: &Path, text: &str) -> Result<Checkpoint> {
    let parse_err = |e: serde_json::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let raw: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let version = raw.get("format_version").and_then(|v| v.as_u64()).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        message: "missing format_version".into(),
    })?;
    if version != u64::from(CHECKPOINT_FORMAT_VERSION) {
        return Err(Error::VersionUnsupported {
            found: version as u32,
            expected: CHECKPOINT_FORMAT_VERSION,
        });
    }
    let file: CheckpointFile = serde_json::from_value(raw).map_err(parse_err)?;
    let g = file.g_stack.to_stack(&file.layer_sizes)?;
    let d = file.dgdn_stack.to_stack(&file.layer_sizes)?;
    let model = GreensNetModel::from_stacks(g, d, file.normalization)?;
    if model.hidden_width() != file.hidden_width {
        return Err(Error::ShapeMismatch(format!(
            "declared hidden width {}, stacks have {}",
            file.hidden_width,
            model.hidden_width()
        )));
    }
    Ok(Checkpoint {
        model,
        meta: file.metadata,
    })
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    write_atomic(path, checkpoint_to_string(ckpt).as_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    checkpoint_from_str(path, &read(path)?)
}

pub fn save_history(path: &Path, record: &TrainingRecord) -> Result<()> {
    let text = csv_text(
        &HISTORY_HEADER,
        record
            .train_loss
            .iter()
            .zip(&record.val_loss)
            .enumerate()
            .map(|(e, (t, v))| vec![(e + 1).to_string(), fmt_real(*t), fmt_real(*v)]),
    );
    write_atomic(path, text.as_bytes())
}

/// Returns `(train_loss, val_loss)` per epoch.
pub fn load_history(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = read(path)?;
    let t = CsvTable::parse(path, &text, &HISTORY_HEADER)?;
    let mut train = Vec::new();
    let mut val = Vec::new();
    for r in 0..t.rows.len() {
        train.push(t.real(r, 1)?);
        val.push(t.real(r, 2)?);
    }
    Ok((train, val))
}

pub fn save_record(path: &Path, record: &TrainingRecord) -> Result<()> {
    let mut s = serde_json::to_string_pretty(record).expect("record serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn load_record(path: &Path) -> Result<TrainingRecord> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
