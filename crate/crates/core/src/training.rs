//! Mini-batch Adam over interior sensors with a held-out validation split,
//! patience-based early stopping and best-of-seeds selection.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bem::RealCauchy;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, PointSet};
use crate::model::{loss, GreensNetModel, ModelInputs, Normalization};
use crate::nn::{AdamConfig, AdamState};

/// A validation loss must drop by more than this to count as an improvement.
pub const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    /// Seed of the train/validation split, shared by every model seed so
    /// that best-validation losses are comparable across seeds.
    pub split_seed: u64,
    pub seeds: Vec<u64>,
    pub hidden_width: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-5,
            batch_size: 5,
            max_epochs: 5000,
            patience: 250,
            validation_fraction: 0.2,
            split_seed: 0,
            seeds: vec![0, 1, 2, 3, 4],
            hidden_width: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::Config(format!("[training] {key}: {msg}")));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate", "must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be >= 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs", "must be >= 1");
        }
        if self.patience == 0 {
            return bad("patience", "must be >= 1");
        }
        if self.patience >= self.max_epochs {
            return bad("patience", "must be smaller than max_epochs");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction", "must lie strictly between 0 and 1");
        }
        if self.seeds.is_empty() {
            return bad("seeds", "need at least one seed");
        }
        if self.hidden_width == 0 {
            return bad("hidden_width", "must be >= 1");
        }
        Ok(())
    }
}

/// Everything a training run consumes.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub mesh: BoundaryMesh,
    pub boundary: RealCauchy,
    /// Interior sensors with their readings.
    pub sensors: PointSet,
}

impl TrainingData {
    fn targets(&self) -> Result<&[f64]> {
        self.sensors
            .values
            .as_deref()
            .ok_or_else(|| Error::ShapeMismatch("sensor set carries no values".into()))
    }
}

/// Seeded shuffle, then the last `round(n·fraction)` (at least one) indices
/// become the validation set. Both halves are returned in ascending order.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::TooFewSensors(n));
    }
    let n_val = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut val = idx.split_off(n - n_val);
    idx.sort_unstable();
    val.sort_unstable();
    Ok((idx, val))
}

pub fn split_train_validation(sensors: &PointSet, fraction: f64, seed: u64) -> Result<(PointSet, PointSet)> {
    let (train, val) = split_indices(sensors.len(), fraction, seed)?;
    Ok((sensors.select(&train), sensors.select(&val)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub seed: u64,
    /// Mean mini-batch loss per epoch.
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// 1-based epoch of the minimum validation loss.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stop_reason: StopReason,
    pub wall_time_s: f64,
}

impl TrainingRecord {
    pub fn epochs(&self) -> usize {
        self.val_loss.len()
    }

    pub fn best_train_loss(&self) -> f64 {
        self.train_loss.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedRun {
    /// Parameters at the best validation epoch, not the last one.
    pub model: GreensNetModel,
    pub record: TrainingRecord,
}

/// Trains a freshly initialized model.
pub fn train_one(seed: u64, data: &TrainingData, config: &TrainConfig) -> Result<TrainedRun> {
    let model = GreensNetModel::new(
        config.hidden_width,
        Normalization::for_domain(&data.mesh.domain),
        seed,
    )?;
    train_from(model, seed, data, config)
}

/// Trains `model` in place; `seed` drives mini-batch shuffling.
pub fn train_from(mut model: GreensNetModel, seed: u64, data: &TrainingData, config: &TrainConfig) -> Result<TrainedRun> {
    config.validate()?;
    let start = Instant::now();
    let targets = data.targets()?;
    let (train_idx, val_idx) = split_indices(data.sensors.len(), config.validation_fraction, config.split_seed)?;
    let all_inputs = model.assemble_inputs(&data.mesh, &data.boundary, &data.sensors)?;
    let train_inputs = all_inputs.select(&train_idx);
    let train_targets: Vec<f64> = train_idx.iter().map(|&i| targets[i]).collect();
    let val_inputs = all_inputs.select(&val_idx);
    let val_targets: Vec<f64> = val_idx.iter().map(|&i| targets[i]).collect();
    drop(all_inputs);

    let adam = AdamConfig::with_learning_rate(config.learning_rate);
    let mut opt_g = AdamState::new(&model.g_stack, adam);
    let mut opt_d = AdamState::new(&model.dgdn_stack, adam);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);

    let mut order: Vec<usize> = (0..train_idx.len()).collect();
    let mut train_hist = Vec::new();
    let mut val_hist = Vec::new();
    let mut best = (f64::INFINITY, 0usize, model.clone());
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut batch_losses = 0.0;
        let mut n_batches = 0;
        for batch in order.chunks(config.batch_size) {
            let inputs = train_inputs.select(batch);
            let t: Vec<f64> = batch.iter().map(|&i| train_targets[i]).collect();
            let (l, grads) = model.loss_gradients(&inputs, &t)?;
            if !l.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, seed });
            }
            opt_g.step(&mut model.g_stack, &grads.g)?;
            opt_d.step(&mut model.dgdn_stack, &grads.dgdn)?;
            batch_losses += l;
            n_batches += 1;
        }
        let val = validation_loss(&model, &val_inputs, &val_targets)?;
        if !val.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, seed });
        }
        train_hist.push(batch_losses / n_batches as f64);
        val_hist.push(val);

        if val < best.0 - IMPROVEMENT_TOL {
            best = (val, epoch, model.clone());
        } else if epoch - best.1 >= config.patience {
            stop_reason = StopReason::Patience;
            break;
        }
    }

    let (best_val_loss, best_epoch, best_model) = best;
    Ok(TrainedRun {
        model: best_model,
        record: TrainingRecord {
            seed,
            train_loss: train_hist,
            val_loss: val_hist,
            best_epoch,
            best_val_loss,
            stop_reason,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// Loss over the whole validation set in one evaluation.
pub fn validation_loss(model: &GreensNetModel, inputs: &ModelInputs, targets: &[f64]) -> Result<f64> {
    loss(&model.predict(inputs)?, targets)
}

#[derive(Debug)]
pub struct MultiSeedOutcome {
    /// Successful runs in seed-list order.
    pub runs: Vec<TrainedRun>,
    /// Seeds whose run aborted, with the reason.
    pub failures: Vec<(u64, String)>,
    /// Index into `runs` of the selected model.
    pub selected: usize,
}

impl MultiSeedOutcome {
    pub fn selected_run(&self) -> &TrainedRun {
        &self.runs[self.selected]
    }
}

/// Picks the run with the lowest best-validation loss; ties go to the lowest
/// seed, then to the earliest position in the list.
pub fn select_best(records: &[&TrainingRecord]) -> Option<usize> {
    (0..records.len()).min_by(|&a, &b| {
        let (ra, rb) = (records[a], records[b]);
        ra.best_val_loss
            .total_cmp(&rb.best_val_loss)
            .then(ra.seed.cmp(&rb.seed))
            .then(a.cmp(&b))
    })
}

/// One run per seed, in parallel, then best-of selection.
pub fn train_multi_seed(data: &TrainingData, config: &TrainConfig) -> Result<MultiSeedOutcome> {
    config.validate()?;
    let results: Vec<(u64, Result<TrainedRun>)> = config
        .seeds
        .par_iter()
        .map(|&seed| (seed, train_one(seed, data, config)))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    let records: Vec<&TrainingRecord> = runs.iter().map(|r| &r.record).collect();
    let selected = select_best(&records).ok_or_else(|| {
        Error::AllRunsFailed(
            failures
                .iter()
                .map(|(s, e)| format!("seed {s}: {e}"))
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;
    Ok(MultiSeedOutcome {
        runs,
        failures,
        selected,
    })
}
