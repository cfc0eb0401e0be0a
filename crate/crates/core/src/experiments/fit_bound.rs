use std::collections::BTreeSet;
use std::path::Path;

use super::csv;
use super::sweep::{load_sweep_table, SweepStatus};
use crate::error::{Error, Result};
use crate::persistence::{fmt_real, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub k: f64,
    pub delta_r: f64,
    pub error: f64,
}

/// `ε(k) ≈ c1·(kΔr) + c2·k·(kΔr)²` with `c1, c2 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundFit {
    pub c1: f64,
    pub c2: f64,
    /// Euclidean norm of the fit residual.
    pub residual: f64,
    pub samples: usize,
}

fn basis(s: &BoundSample) -> [f64; 2] {
    let x = s.k * s.delta_r;
    [x, s.k * x * x]
}

fn residual_norm(samples: &[BoundSample], c: [f64; 2]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let [a, b] = basis(s);
            (c[0] * a + c[1] * b - s.error).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Non-negative least squares over the two-term model. With two unknowns the
/// active-set search is exhaustive: the unconstrained optimum, each
/// single-term optimum, and zero.
pub fn fit_error_bound(samples: &[BoundSample]) -> Result<BoundFit> {
    let distinct: BTreeSet<u64> = samples.iter().map(|s| s.k.to_bits()).collect();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 distinct wavenumbers, got {}",
            distinct.len()
        )));
    }
    let (mut aa, mut ab, mut bb, mut ay, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let [a, b] = basis(s);
        aa += a * a;
        ab += a * b;
        bb += b * b;
        ay += a * s.error;
        by += b * s.error;
    }
    let mut candidates = vec![[0.0, 0.0]];
    if aa > 0.0 {
        candidates.push([(ay / aa).max(0.0), 0.0]);
    }
    if bb > 0.0 {
        candidates.push([0.0, (by / bb).max(0.0)]);
    }
    let det = aa * bb - ab * ab;
    if det > 1e-14 * aa * bb {
        let c = [(bb * ay - ab * by) / det, (aa * by - ab * ay) / det];
        if c[0] >= 0.0 && c[1] >= 0.0 {
            candidates.push(c);
        }
    }
    let best = candidates
        .into_iter()
        .map(|c| (residual_norm(samples, c), c))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("zero candidate is always present");
    Ok(BoundFit {
        c1: best.1[0],
        c2: best.1[1],
        residual: best.0,
        samples: samples.len(),
    })
}

/// Fits the bound to the successful rows of a sweep table, optionally
/// restricted to one sensor count and hidden width.
pub fn cmd_fit_bound(
    table: &Path,
    sensors: Option<usize>,
    width: Option<usize>,
    out: Option<&Path>,
) -> Result<BoundFit> {
    let samples: Vec<BoundSample> = load_sweep_table(table)?
        .into_iter()
        .filter(|r| r.status == SweepStatus::Ok)
        .filter(|r| sensors.is_none_or(|n| r.sensors() == n))
        .filter(|r| width.is_none_or(|w| r.cell.width == w))
        .map(|r| BoundSample {
            k: r.cell.k,
            delta_r: r.delta_r,
            error: r.testing_mse,
        })
        .collect();
    let fit = fit_error_bound(&samples)?;
    if let Some(dir) = out {
        write_atomic(
            &dir.join("fit_bound.csv"),
            csv(
                "c1,c2,residual,samples",
                [format!("{},{},{},{}", fmt_real(fit.c1), fmt_real(fit.c2), fmt_real(fit.residual), fit.samples)],
            )
            .as_bytes(),
        )?;
    }
    Ok(fit)
}
