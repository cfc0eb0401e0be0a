use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csv;
use super::train::check_dataset_matches;
use crate::config::{ExperimentConfig, ReportSection};
use crate::error::{Error, Result};
use crate::geometry::{lattice_spacing, PointSet, Point3};
use crate::model::loss;
use crate::persistence::{fmt_real, load_checkpoint, load_dataset, write_atomic};

/// Reference values with `|u|` at or below this are excluded from relative statistics.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;
/// Half-width of the "accurate" band for the signed relative error.
pub const WITHIN_TOLERANCE: f64 = 0.05;

const SLICE_TOL: f64 = 1e-9;

/// `(prediction - reference) / |reference|`, or `None` below the floor.
pub fn signed_relative_error(prediction: f64, reference: f64) -> Option<f64> {
    (reference.abs() > RELATIVE_ERROR_FLOOR).then(|| (prediction - reference) / reference.abs())
}

/// One histogram bin; the first and last bins are open-ended
/// (`lower = -inf` / `upper = +inf`) and catch everything outside the range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSummary {
    pub points: usize,
    pub evaluable: usize,
    pub below_floor: usize,
    pub within_tolerance: usize,
    pub fraction_within_tolerance: f64,
    pub tolerance: f64,
    pub mean_abs_relative_error: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    /// Network loss evaluated over the whole grid.
    pub testing_loss: f64,
    pub rmse: f64,
    pub slice_axis: String,
    pub slice_coord: f64,
    pub slice_points: usize,
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub points: Vec<Point3>,
    pub reference: Vec<f64>,
    pub prediction: Vec<f64>,
    pub relative_error: Vec<Option<f64>>,
    pub histogram: Vec<HistogramBin>,
    /// Indices of the points on the cross-section.
    pub slice: Vec<usize>,
    pub summary: ReconstructionSummary,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn histogram(errors: &[f64], bins: usize, range: f64) -> Vec<HistogramBin> {
    let width = 2.0 * range / bins as f64;
    let mut hist: Vec<HistogramBin> = std::iter::once((f64::NEG_INFINITY, -range))
        .chain((0..bins).map(|i| (-range + i as f64 * width, -range + (i + 1) as f64 * width)))
        .chain(std::iter::once((range, f64::INFINITY)))
        .map(|(lower, upper)| HistogramBin {
            lower,
            upper,
            count: 0,
            mass: 0.0,
        })
        .collect();
    for &e in errors {
        let slot = if e < -range {
            0
        } else if e >= range {
            bins + 1
        } else {
            1 + (((e + range) / width) as usize).min(bins - 1)
        };
        hist[slot].count += 1;
    }
    if !errors.is_empty() {
        for b in &mut hist {
            b.mass = b.count as f64 / errors.len() as f64;
        }
    }
    hist
}

impl ReconstructionReport {
    /// Error statistics of `prediction` against the reference values of
    /// `grid`. The slice keeps points within `half_spacing` of the configured
    /// plane.
    pub fn build(grid: &PointSet, prediction: Vec<f64>, report: &ReportSection, half_spacing: f64) -> Result<Self> {
        let reference = grid
            .values
            .clone()
            .ok_or_else(|| Error::ShapeMismatch("grid carries no reference values".into()))?;
        if prediction.len() != reference.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} predictions for {} grid points",
                prediction.len(),
                reference.len()
            )));
        }
        let relative_error: Vec<Option<f64>> = prediction
            .iter()
            .zip(&reference)
            .map(|(p, u)| signed_relative_error(*p, *u))
            .collect();
        let mut errors: Vec<f64> = relative_error.iter().flatten().copied().collect();
        let hist = histogram(&errors, report.histogram_bins, report.histogram_range);
        errors.sort_by(f64::total_cmp);
        let within = errors.iter().filter(|e| e.abs() <= WITHIN_TOLERANCE).count();
        let n_eval = errors.len();
        let frac = |n: usize| if n_eval == 0 { 0.0 } else { n as f64 / n_eval as f64 };

        let axis = match report.slice_axis.as_str() {
            "x" => 0,
            "y" => 1,
            _ => 2,
        };
        let slice: Vec<usize> = (0..grid.len())
            .filter(|&i| (grid.points[i][axis] - report.slice_coord).abs() <= half_spacing + SLICE_TOL)
            .collect();

        let summary = ReconstructionSummary {
            points: grid.len(),
            evaluable: n_eval,
            below_floor: grid.len() - n_eval,
            within_tolerance: within,
            fraction_within_tolerance: frac(within),
            tolerance: WITHIN_TOLERANCE,
            mean_abs_relative_error: if n_eval == 0 {
                f64::NAN
            } else {
                errors.iter().map(|e| e.abs()).sum::<f64>() / n_eval as f64
            },
            q05: quantile(&errors, 0.05),
            q25: quantile(&errors, 0.25),
            median: quantile(&errors, 0.5),
            q75: quantile(&errors, 0.75),
            q95: quantile(&errors, 0.95),
            testing_loss: loss(&prediction, &reference)?,
            rmse: crate::model::rmse(&prediction, &reference)?,
            slice_axis: report.slice_axis.clone(),
            slice_coord: report.slice_coord,
            slice_points: slice.len(),
        };
        Ok(Self {
            points: grid.points.clone(),
            reference,
            prediction,
            relative_error,
            histogram: hist,
            slice,
            summary,
        })
    }

    fn point_row(&self, i: usize) -> String {
        let p = self.points[i];
        format!(
            "{},{},{},{},{},{}",
            fmt_real(p[0]),
            fmt_real(p[1]),
            fmt_real(p[2]),
            fmt_real(self.reference[i]),
            fmt_real(self.prediction[i]),
            self.relative_error[i].map(fmt_real).unwrap_or_default()
        )
    }

    /// Writes `points.csv`, `histogram.csv`, `slice.csv` and `summary.toml`.
    pub fn write(&self, out: &Path) -> Result<()> {
        const HEADER: &str = "x,y,z,u_ref,u_pred,rel_error";
        write_atomic(
            &out.join("points.csv"),
            csv(HEADER, (0..self.points.len()).map(|i| self.point_row(i))).as_bytes(),
        )?;
        write_atomic(
            &out.join("slice.csv"),
            csv(HEADER, self.slice.iter().map(|&i| self.point_row(i))).as_bytes(),
        )?;
        write_atomic(
            &out.join("histogram.csv"),
            csv(
                "lower,upper,count,mass",
                self.histogram
                    .iter()
                    .map(|b| format!("{},{},{},{}", b.lower, b.upper, b.count, fmt_real(b.mass))),
            )
            .as_bytes(),
        )?;
        let summary = toml::to_string(&self.summary).map_err(|e| Error::Config(e.to_string()))?;
        write_atomic(&out.join("summary.toml"), summary.as_bytes())
    }
}

/// Predicts the reference grid with a trained checkpoint and writes the
/// error report under `out`.
pub fn cmd_reconstruct(
    cfg: &ExperimentConfig,
    dataset_dir: &Path,
    checkpoint: &Path,
    out: &Path,
) -> Result<ReconstructionReport> {
    cfg.validate()?;
    let bundle = load_dataset(dataset_dir)?;
    check_dataset_matches(cfg, &bundle)?;
    let ckpt = load_checkpoint(checkpoint)?;
    if ckpt.model.hidden_width() != cfg.training.hidden_width {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has hidden width {}, configuration asks for {}",
            ckpt.model.hidden_width(),
            cfg.training.hidden_width
        )));
    }
    if ckpt.meta.wavenumber != bundle.manifest.wavenumber {
        return Err(Error::Config(format!(
            "checkpoint was trained at k = {}, dataset has k = {}",
            ckpt.meta.wavenumber, bundle.manifest.wavenumber
        )));
    }
    let prediction = ckpt.model.predict_points(&bundle.mesh, &bundle.boundary, &bundle.grid)?;
    let spacing = lattice_spacing(&bundle.mesh.domain, bundle.manifest.grid_counts);
    let report = ReconstructionReport::build(
        &bundle.grid,
        prediction,
        &cfg.report,
        0.5 * spacing[cfg.slice_axis()],
    )?;
    report.write(out)?;
    Ok(report)
}
