use crate::error::Result;

/// A model trained one epoch at a time and scored on held-out data.
pub trait EpochModel {
    type Snapshot;

    fn train_epoch(&mut self, epoch: usize) -> Result<()>;
    /// Validation macro F1 (higher is better).
    fn validation_score(&mut self) -> Result<f64>;
    fn snapshot(&self) -> Self::Snapshot;
    fn restore(&mut self, snapshot: Self::Snapshot);
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingOutcome {
    /// 1-based epoch whose parameters the model ends with.
    pub best_epoch: usize,
    pub best_score: f64,
    pub epochs_run: usize,
    pub history: Vec<f64>,
}

/// Trains up to `epochs_cap` epochs. With `Some(patience)`, stops once
/// `patience` consecutive epochs fail to beat the best score strictly,
/// then restores the best epoch. With `None`, every epoch runs and the
/// final parameters are kept.
pub fn fit_with_early_stopping<M: EpochModel>(
    model: &mut M,
    epochs_cap: usize,
    patience: Option<usize>,
) -> Result<StoppingOutcome> {
    let mut best: Option<(usize, f64, M::Snapshot)> = None;
    let mut history = Vec::new();
    let mut stale = 0;
    for epoch in 1..=epochs_cap {
        model
            .train_epoch(epoch)
            .map_err(|e| e.context(format!("epoch {epoch}")))?;
        let score = model
            .validation_score()
            .map_err(|e| e.context(format!("epoch {epoch}")))?;
        history.push(score);
        let Some(patience) = patience else { continue };
        if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((epoch, score, model.snapshot()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= patience {
                break;
            }
        }
    }
    let epochs_run = history.len();
    match best {
        Some((epoch, score, snap)) => {
            if epoch != epochs_run {
                model.restore(snap);
            }
            Ok(StoppingOutcome {
                best_epoch: epoch,
                best_score: score,
                epochs_run,
                history,
            })
        }
        None => Ok(StoppingOutcome {
            best_epoch: epochs_run,
            best_score: history.last().copied().unwrap_or(f64::NAN),
            epochs_run,
            history,
        }),
    }
}
