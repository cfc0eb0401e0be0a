use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::cmd_generate;
use super::reconstruct::cmd_reconstruct;
use super::train::train_seeds;
use super::{csv, thread_pool};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry::LatticeCounts;
use crate::persistence::{fmt_real, write_atomic};

pub const SWEEP_TABLE: &str = "sweep.csv";
const ROW_FILE: &str = "row.json";
const HEADER: &str =
    "k,nx,ny,nz,sensors,width,delta_r,status,selected_seed,best_val_loss,best_train_loss,testing_mse,wall_time_s,message";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub k: f64,
    pub sensor_counts: LatticeCounts,
    pub width: usize,
}

impl SweepCell {
    /// Directory name of the cell, unique within a sweep.
    pub fn dir_name(&self) -> String {
        let [a, b, c] = self.sensor_counts;
        format!("k{}_s{a}x{b}x{c}_w{}", self.k, self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepStatus {
    Ok,
    Failed,
}

/// One line of the sweep table. Loss fields are NaN for failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    /// Collocation spacing (mesh step).
    pub delta_r: f64,
    pub status: SweepStatus,
    pub selected_seed: Option<u64>,
    /// Selected run's best validation loss.
    pub best_val_loss: f64,
    /// Selected run's training loss at its best epoch.
    pub best_train_loss: f64,
    /// Network loss of the selected model over the reference grid.
    pub testing_mse: f64,
    /// Time spent computing the cell (generate, train, reconstruct).
    pub wall_time_s: f64,
    pub message: String,
}

impl SweepRow {
    pub fn sensors(&self) -> usize {
        self.cell.sensor_counts.iter().product()
    }

    fn to_csv(&self) -> String {
        let [a, b, c] = self.cell.sensor_counts;
        let real = |v: f64| if v.is_nan() { String::new() } else { fmt_real(v) };
        format!(
            "{},{a},{b},{c},{},{},{},{},{},{},{},{},{},{}",
            self.cell.k,
            self.sensors(),
            self.cell.width,
            self.delta_r,
            match self.status {
                SweepStatus::Ok => "ok",
                SweepStatus::Failed => "failed",
            },
            self.selected_seed.map(|s| s.to_string()).unwrap_or_default(),
            real(self.best_val_loss),
            real(self.best_train_loss),
            real(self.testing_mse),
            if self.wall_time_s.is_nan() { String::new() } else { format!("{:.3}", self.wall_time_s) },
            self.message.replace([',', '\n'], ";")
        )
    }
}

/// Loads a table written by [`cmd_sweep`].
pub fn load_sweep_table(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let schema = |line: usize, column: &str, reason: String| Error::SchemaMismatch {
        file: path.to_path_buf(),
        line,
        column: column.to_string(),
        reason,
    };
    if lines.next().map(|(_, l)| l) != Some(HEADER) {
        return Err(schema(1, "header", format!("expected `{HEADER}`")));
    }
    let columns: Vec<&str> = HEADER.split(',').collect();
    let mut rows = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = n + 1;
        let f: Vec<&str> = line.splitn(columns.len(), ',').collect();
        if f.len() != columns.len() {
            return Err(schema(line_no, "*", format!("expected {} fields", columns.len())));
        }
        let num = |i: usize| -> Result<f64> {
            if f[i].is_empty() {
                return Ok(f64::NAN);
            }
            f[i].parse().map_err(|_| schema(line_no, columns[i], format!("`{}` is not a number", f[i])))
        };
        let int = |i: usize| -> Result<usize> {
            f[i].parse().map_err(|_| schema(line_no, columns[i], format!("`{}` is not an integer", f[i])))
        };
        let status = match f[7] {
            "ok" => SweepStatus::Ok,
            "failed" => SweepStatus::Failed,
            other => return Err(schema(line_no, "status", format!("unknown status `{other}`"))),
        };
        rows.push(SweepRow {
            cell: SweepCell {
                k: num(0)?,
                sensor_counts: [int(1)?, int(2)?, int(3)?],
                width: int(5)?,
            },
            delta_r: num(6)?,
            status,
            selected_seed: if f[8].is_empty() { None } else { Some(int(8)? as u64) },
            best_val_loss: num(9)?,
            best_train_loss: num(10)?,
            testing_mse: num(11)?,
            wall_time_s: num(12)?,
            message: f[13].to_string(),
        });
    }
    Ok(rows)
}

fn run_cell(base: &ExperimentConfig, cell: SweepCell, dir: &Path) -> Result<SweepRow> {
    let start = Instant::now();
    let mut cfg = base.clone();
    cfg.wavenumber.k = cell.k;
    cfg.sensors.counts = cell.sensor_counts;
    cfg.training.hidden_width = cell.width;
    let dataset = dir.join("dataset");
    let train_dir = dir.join("train");
    cmd_generate(&cfg, &dataset)?;
    let summary = train_seeds(&cfg, &dataset, &train_dir, true)?;
    let selected = summary
        .records
        .iter()
        .find(|r| r.seed == summary.selected.seed)
        .expect("selected seed has a record");
    let report = cmd_reconstruct(
        &cfg,
        &dataset,
        &train_dir.join(&summary.selected.checkpoint),
        &dir.join("reconstruction"),
    )?;
    Ok(SweepRow {
        cell,
        delta_r: cfg.mesh.step,
        status: SweepStatus::Ok,
        selected_seed: Some(selected.seed),
        best_val_loss: selected.best_val_loss,
        best_train_loss: selected.best_train_loss(),
        testing_mse: report.summary.testing_loss,
        wall_time_s: start.elapsed().as_secs_f64(),
        message: String::new(),
    })
}

/// Every (k, sensor layout, width) combination of the configured grid, in
/// table order.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<SweepCell> {
    let s = &cfg.sweep;
    s.wavenumbers
        .iter()
        .flat_map(|&k| {
            s.sensor_layouts.iter().flat_map(move |&sensor_counts| {
                s.hidden_widths.iter().map(move |&width| SweepCell {
                    k,
                    sensor_counts,
                    width,
                })
            })
        })
        .collect()
}

/// Runs every cell of the sweep grid (generate, multi-seed train, grid
/// reconstruction), `workers` cells at a time. Cells whose `row.json`
/// exists are reused unchanged; failed cells are recorded and retried on
/// the next run. Writes `sweep.csv` and `monotonicity.csv` under `out`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let cells = sweep_cells(cfg);
    let cells_dir = out.join("cells");
    let rows: Vec<SweepRow> = thread_pool(workers)?.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let dir: PathBuf = cells_dir.join(cell.dir_name());
                let row_path = dir.join(ROW_FILE);
                if let Some(row) = std::fs::read_to_string(&row_path)
                    .ok()
                    .and_then(|t| serde_json::from_str::<SweepRow>(&t).ok())
                {
                    return row;
                }
                match run_cell(cfg, cell, &dir).and_then(|row| {
                    let text = serde_json::to_string_pretty(&row).expect("row serializes");
                    write_atomic(&row_path, text.as_bytes())?;
                    Ok(row)
                }) {
                    Ok(row) => row,
                    Err(e) => SweepRow {
                        cell,
                        delta_r: cfg.mesh.step,
                        status: SweepStatus::Failed,
                        selected_seed: None,
                        best_val_loss: f64::NAN,
                        best_train_loss: f64::NAN,
                        testing_mse: f64::NAN,
                        wall_time_s: f64::NAN,
                        message: e.to_string(),
                    },
                }
            })
            .collect()
    });
    write_atomic(&out.join(SWEEP_TABLE), csv(HEADER, rows.iter().map(SweepRow::to_csv)).as_bytes())?;
    let diag = monotonic_in_k(&rows, 0.0, 4.0);
    write_atomic(
        &out.join("monotonicity.csv"),
        csv(
            "sensors,width,k_values,monotonic,endpoint_increase",
            diag.iter().map(|d| {
                format!(
                    "{},{},{},{},{}",
                    d.sensors,
                    d.width,
                    d.ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "),
                    d.monotonic,
                    d.endpoint_increase
                )
            }),
        )
        .as_bytes(),
    )?;
    Ok(rows)
}

/// Trend of testing error with k for one (sensors, width) series.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityDiagnostic {
    pub sensors: usize,
    pub width: usize,
    pub ks: Vec<f64>,
    /// Testing error is non-decreasing across every consecutive pair.
    pub monotonic: bool,
    /// Testing error at the largest k exceeds the one at the smallest.
    pub endpoint_increase: bool,
}

/// Per-series monotonicity of testing error over successful rows with
/// `k_lo <= k <= k_hi`. Series with fewer than two points are skipped.
pub fn monotonic_in_k(rows: &[SweepRow], k_lo: f64, k_hi: f64) -> Vec<MonotonicityDiagnostic> {
    let mut series: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if r.status == SweepStatus::Ok && (k_lo..=k_hi).contains(&r.cell.k) {
            series
                .entry((r.sensors(), r.cell.width))
                .or_default()
                .push((r.cell.k, r.testing_mse));
        }
    }
    series
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|((sensors, width), mut v)| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            MonotonicityDiagnostic {
                sensors,
                width,
                ks: v.iter().map(|p| p.0).collect(),
                monotonic: v.windows(2).all(|w| w[1].1 >= w[0].1),
                endpoint_increase: v[v.len() - 1].1 > v[0].1,
            }
        })
        .collect()
}
