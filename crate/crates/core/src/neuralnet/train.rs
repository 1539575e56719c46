use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::model::{Mode, Model};
use crate::error::{Error, Result};
use crate::representation::EncodedBatch;

pub const DEFAULT_BATCH_SIZE: usize = 64;

/// One optimizer update on `batch`. Returns the pre-update loss.
pub fn train_step(
    model: &mut Model,
    batch: &EncodedBatch,
    weights: &[f64],
    adam: &mut AdamState,
    dropout_seed: u64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Data("training batch is empty".into()));
    }
    let (loss, grads) = model.loss_and_gradients(
        batch.sequences.view(),
        &batch.labels,
        weights,
        Mode::Train { seed: dropout_seed },
    )?;
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("loss became {loss}")));
    }
    adam.step(model.parameters_mut(), &grads)?;
    if !model.parameters().all_finite() {
        return Err(Error::Numeric("parameters became non-finite after an update".into()));
    }
    Ok(loss)
}

/// Mini-batch epochs with a seeded shuffle and per-step dropout seeds.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub batch_size: usize,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        Ok(Self {
            batch_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Runs one pass over `data` and returns the mean step loss.
    pub fn epoch(
        &mut self,
        model: &mut Model,
        data: &EncodedBatch,
        weights: &[f64],
        adam: &mut AdamState,
    ) -> Result<f64> {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        let mut steps = 0usize;
        for chunk in order.chunks(self.batch_size) {
            let batch = data.select(chunk);
            let seed = self.rng.gen();
            total += train_step(model, &batch, weights, adam, seed)?;
            steps += 1;
        }
        if steps == 0 {
            return Err(Error::Data("no training rows".into()));
        }
        Ok(total / steps as f64)
    }
}

/// Predicted class per row of `data`.
pub fn predict_batch(model: &Model, data: &EncodedBatch) -> Result<Vec<usize>> {
    if data.sequences.len_of(Axis(0)) == 0 {
        return Ok(Vec::new());
    }
    model.predict(data.sequences.view())
}
