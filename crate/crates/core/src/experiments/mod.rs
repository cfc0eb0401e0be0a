//! The studies behind the `bemnet` subcommands.
//!
//! Each `cmd_*` function takes a validated [`ExperimentConfig`] and an output
//! directory, writes CSV / TOML / JSON artifacts there and returns an
//! in-memory summary. Reruns with identical inputs reproduce every artifact
//! byte for byte, except the wall-time fields of training records.

mod fit_bound;
mod generate;
mod nyquist;
mod reconstruct;
mod sweep;
mod train;

pub use fit_bound::{cmd_fit_bound, fit_error_bound, BoundFit, BoundSample};
pub use generate::{cmd_generate, generator_version};
pub use nyquist::{cmd_nyquist, nyquist_check, NyquistOverrides, NyquistReport};
pub use reconstruct::{
    cmd_reconstruct, signed_relative_error, HistogramBin, ReconstructionReport, ReconstructionSummary,
    RELATIVE_ERROR_FLOOR, WITHIN_TOLERANCE,
};
pub use sweep::{cmd_sweep, load_sweep_table, monotonic_in_k, SweepCell, SweepRow, SweepStatus};
pub use train::{cmd_train, resolve_selected, SelectedPointer, TrainSummary};

use crate::error::{Error, Result};

/// Rayon pool with exactly `workers` threads.
pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}
