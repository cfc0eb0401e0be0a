use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv, thread_pool};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::persistence::{
    fmt_real, load_checkpoint, load_dataset, load_record, save_checkpoint, save_history, save_record,
    write_atomic, Checkpoint, CheckpointMeta, DatasetBundle,
};
use crate::training::{select_best, train_one, TrainConfig, TrainedRun, TrainingData, TrainingRecord};

pub const SELECTED_FILE: &str = "selected.json";

/// Contents of `selected.json`; `checkpoint` is relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPointer {
    pub seed: u64,
    pub checkpoint: String,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    /// Successful runs, in seed-list order.
    pub records: Vec<TrainingRecord>,
    pub failures: Vec<(u64, String)>,
    /// Seeds whose outputs already existed and were reused.
    pub reused: Vec<u64>,
    pub selected: SelectedPointer,
}

fn checkpoint_rel(seed: u64) -> String {
    format!("checkpoints/seed_{seed}.json")
}

fn record_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("records/seed_{seed}.json"))
}

/// Path of the selected checkpoint of a finished `train` run.
pub fn resolve_selected(run_dir: &Path) -> Result<PathBuf> {
    let path = run_dir.join(SELECTED_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let ptr: SelectedPointer = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(run_dir.join(ptr.checkpoint))
}

/// Refuses a dataset generated for a different problem than `cfg` describes.
pub(crate) fn check_dataset_matches(cfg: &ExperimentConfig, bundle: &DatasetBundle) -> Result<()> {
    let m = &bundle.manifest;
    if m.wavenumber != cfg.wavenumber.k {
        return Err(Error::Config(format!(
            "dataset was generated with k = {}, configuration asks for k = {}",
            m.wavenumber, cfg.wavenumber.k
        )));
    }
    if m.domain != cfg.domain.lengths {
        return Err(Error::Config(format!(
            "dataset box {:?} differs from configured box {:?}",
            m.domain, cfg.domain.lengths
        )));
    }
    Ok(())
}

fn reuse(out: &Path, seed: u64, cfg: &TrainConfig) -> Option<TrainingRecord> {
    let record = load_record(&record_path(out, seed)).ok()?;
    let ckpt = load_checkpoint(&out.join(checkpoint_rel(seed))).ok()?;
    (ckpt.model.hidden_width() == cfg.hidden_width && record.seed == seed).then_some(record)
}

fn write_run(out: &Path, run: &TrainedRun, k: f64) -> Result<()> {
    let r = &run.record;
    save_checkpoint(
        &out.join(checkpoint_rel(r.seed)),
        &Checkpoint {
            model: run.model.clone(),
            meta: CheckpointMeta {
                seed: r.seed,
                best_epoch: r.best_epoch,
                best_val_loss: r.best_val_loss,
                stop_reason: r.stop_reason,
                wavenumber: k,
            },
        },
    )?;
    save_history(&out.join(format!("history/seed_{}.csv", r.seed)), r)?;
    // The record goes last: its presence marks the seed as complete.
    save_record(&record_path(out, r.seed), r)
}

/// Trains one model per configured seed on the dataset in `dataset_dir` and
/// writes checkpoints, histories, records and the `selected.json` pointer
/// under `out`. With `resume`, seeds whose record and checkpoint already
/// exist are not retrained.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    dataset_dir: &Path,
    out: &Path,
    resume: bool,
    workers: usize,
) -> Result<TrainSummary> {
    thread_pool(workers)?.install(|| train_seeds(cfg, dataset_dir, out, resume))
}

/// [`cmd_train`] on the current rayon pool.
pub(crate) fn train_seeds(cfg: &ExperimentConfig, dataset_dir: &Path, out: &Path, resume: bool) -> Result<TrainSummary> {
    cfg.validate()?;
    // Everything that can fail on input happens before the first write.
    let bundle = load_dataset(dataset_dir)?;
    check_dataset_matches(cfg, &bundle)?;
    let tc = &cfg.training;
    let data = TrainingData {
        mesh: bundle.mesh,
        boundary: bundle.boundary,
        sensors: bundle.sensors,
    };

    let reused: Vec<(u64, Option<TrainingRecord>)> = tc
        .seeds
        .iter()
        .map(|&s| (s, if resume { reuse(out, s, tc) } else { None }))
        .collect();
    let results: Vec<(u64, bool, Result<TrainingRecord>)> = reused
            .into_par_iter()
            .map(|(seed, prior)| match prior {
                Some(rec) => (seed, true, Ok(rec)),
                None => {
                    let r = train_one(seed, &data, tc).and_then(|run| {
                        write_run(out, &run, cfg.wavenumber.k)?;
                        Ok(run.record)
                    });
                    (seed, false, r)
                }
            })
            .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut reused_seeds = Vec::new();
    for (seed, was_reused, r) in results {
        match r {
            Ok(rec) => {
                if was_reused {
                    reused_seeds.push(seed);
                }
                records.push(rec);
            }
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    let refs: Vec<&TrainingRecord> = records.iter().collect();
    let best = select_best(&refs).ok_or_else(|| {
        Error::AllRunsFailed(
            failures
                .iter()
                .map(|(s, e)| format!("seed {s}: {e}"))
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;
    let chosen = &records[best];
    let selected = SelectedPointer {
        seed: chosen.seed,
        checkpoint: checkpoint_rel(chosen.seed),
        best_epoch: chosen.best_epoch,
        best_val_loss: chosen.best_val_loss,
    };
    let mut text = serde_json::to_string_pretty(&selected).expect("pointer serializes");
    text.push('\n');
    write_atomic(&out.join(SELECTED_FILE), text.as_bytes())?;

    let rows = records
        .iter()
        .map(|r| {
            format!(
                "{},ok,{},{},{},{},{},{:.3},{},",
                r.seed,
                r.epochs(),
                r.best_epoch,
                fmt_real(r.best_val_loss),
                fmt_real(r.best_train_loss()),
                stop_label(r),
                r.wall_time_s,
                u8::from(r.seed == chosen.seed)
            )
        })
        .chain(failures.iter().map(|(s, e)| format!("{s},failed,,,,,,,0,{}", e.replace(',', ";"))));
    write_atomic(
        &out.join("training_summary.csv"),
        csv(
            "seed,status,epochs,best_epoch,best_val_loss,best_train_loss,stop_reason,wall_time_s,selected,message",
            rows,
        )
        .as_bytes(),
    )?;

    Ok(TrainSummary {
        records,
        failures,
        reused: reused_seeds,
        selected,
    })
}

fn stop_label(r: &TrainingRecord) -> String {
    serde_json::to_value(r.stop_reason)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}
