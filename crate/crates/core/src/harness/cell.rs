use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::early::{fit_with_early_stopping, EpochModel};
use super::seeds::{derive_seed, SeedRole};
use super::split::{stratified_holdout, stratified_kfold, SplitPlan};
use crate::balance::{class_weights, round_to_token_space, smote, SmoteConfig, SmoteTarget, DEFAULT_K_NEIGHBORS};
use crate::data::{Subtask, TweetRecord};
use crate::error::{Error, Result};
use crate::metrics::{report, EvaluationReport};
use crate::neuralnet::{AdamConfig, AdamState, Model, ModelSpec, Parameters, Trainer, Variant, DEFAULT_BATCH_SIZE};
use crate::preprocess::{preprocess, PipelineConfig, Resources};
use crate::representation::{
    build_embedding_matrix, EmbeddingChoice, EmbeddingTable, EncodedBatch, Vocabulary, DEFAULT_MAX_LEN,
    DEFAULT_MAX_SIZE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BalanceStrategy {
    None,
    Smote,
    ClassWeights,
}

impl BalanceStrategy {
    pub const ALL: [BalanceStrategy; 3] = [
        BalanceStrategy::None,
        BalanceStrategy::Smote,
        BalanceStrategy::ClassWeights,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BalanceStrategy::None => "none",
            BalanceStrategy::Smote => "smote",
            BalanceStrategy::ClassWeights => "class_weights",
        }
    }
}

impl fmt::Display for BalanceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for BalanceStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "imbalanced" => Ok(BalanceStrategy::None),
            "smote" => Ok(BalanceStrategy::Smote),
            "class_weights" | "weights" => Ok(BalanceStrategy::ClassWeights),
            _ => Err(Error::Config(format!(
                "unknown balance strategy `{s}` (expected none, smote or class_weights)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// k-fold cross-validation on the train/validation side of the holdout split.
    CrossValidation { k: usize },
    /// One model trained on the train side (with an inner validation split
    /// for early stopping) and scored on the test side.
    Holdout,
}

impl Protocol {
    pub fn default_for(subtask: Subtask) -> Self {
        match subtask {
            Subtask::A => Protocol::CrossValidation { k: 5 },
            Subtask::B | Subtask::C => Protocol::Holdout,
        }
    }
}

/// Everything about a run except what the grid varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub epochs: usize,
    /// `None` trains exactly `epochs` epochs without early stopping.
    pub patience: Option<usize>,
    pub holdout_ratio: f64,
    pub inner_ratio: f64,
    pub batch_size: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub min_freq: usize,
    pub smote_k: usize,
    pub adam: AdamConfig,
    pub embedding_dim: usize,
    pub embedding_trainable: bool,
    pub rnn_units: usize,
    pub conv_filters: usize,
    pub kernel_size: usize,
    pub pool_size: usize,
    pub dense_units: usize,
    pub spatial_dropout: f64,
    pub rnn_dropout: f64,
    pub dense_dropout: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        let spec = ModelSpec::new(Variant::BiLstmCnn, 100, 2);
        Self {
            epochs: 30,
            patience: Some(10),
            holdout_ratio: 0.8,
            inner_ratio: 0.8,
            batch_size: DEFAULT_BATCH_SIZE,
            max_len: DEFAULT_MAX_LEN,
            vocab_size: DEFAULT_MAX_SIZE,
            min_freq: 1,
            smote_k: DEFAULT_K_NEIGHBORS,
            adam: AdamConfig::default(),
            embedding_dim: spec.embedding_dim,
            embedding_trainable: spec.embedding_trainable,
            rnn_units: spec.rnn_units,
            conv_filters: spec.conv_filters,
            kernel_size: spec.kernel_size,
            pool_size: spec.pool_size,
            dense_units: spec.dense_units,
            spatial_dropout: spec.spatial_dropout_rate,
            rnn_dropout: spec.internal_rnn_dropout_rate,
            dense_dropout: spec.dense_dropout,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.patience == Some(0) {
            return Err(Error::Config("patience must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.smote_k < 1 {
            return Err(Error::Config("smote_k must be >= 1".into()));
        }
        self.adam.validate()
    }
}

/// A single grid cell, complete enough to rerun on the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub grid: GridKind,
    pub subtask: Subtask,
    pub variant: Variant,
    pub balance: BalanceStrategy,
    pub embedding: EmbeddingChoice,
    pub embedding_path: Option<PathBuf>,
    pub protocol: Protocol,
    pub settings: RunSettings,
    pub preprocess: PipelineConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GridKind {
    Single,
    Architectures,
    Imbalance,
    Epochs,
    Dropout,
    Embeddings,
}

impl GridKind {
    pub fn key(self) -> &'static str {
        match self {
            GridKind::Single => "single",
            GridKind::Architectures => "architectures",
            GridKind::Imbalance => "imbalance",
            GridKind::Epochs => "epochs",
            GridKind::Dropout => "dropout",
            GridKind::Embeddings => "embeddings",
        }
    }
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            GridKind::Single,
            GridKind::Architectures,
            GridKind::Imbalance,
            GridKind::Epochs,
            GridKind::Dropout,
            GridKind::Embeddings,
        ]
        .into_iter()
        .find(|g| g.key() == s.trim())
        .ok_or_else(|| Error::Config(format!("unknown grid `{s}`")))
    }
}

/// `0.2` → `20%`, `0.0` → `none`.
pub fn dropout_label(rate: f64) -> String {
    if rate == 0.0 {
        "none".to_string()
    } else {
        format!("{}%", (rate * 100.0).round())
    }
}

impl CellSpec {
    pub fn cell_id(&self) -> String {
        let base = format!("{}-{}-{}", self.grid.key(), self.subtask, self.variant);
        match self.grid {
            GridKind::Single | GridKind::Architectures => base,
            GridKind::Imbalance => format!("{base}-{}", self.balance),
            GridKind::Epochs => format!("{base}-{}", self.settings.epochs),
            GridKind::Dropout => format!(
                "{base}-{}",
                dropout_label(self.settings.spatial_dropout).trim_end_matches('%')
            ),
            GridKind::Embeddings => format!("{base}-{}", self.embedding.key()),
        }
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding.dimension().unwrap_or(self.settings.embedding_dim)
    }

    pub fn model_spec(&self, seed: u64) -> ModelSpec {
        let s = &self.settings;
        ModelSpec {
            variant: self.variant,
            embedding_dim: self.embedding_dim(),
            rnn_units: s.rnn_units,
            conv_filters: s.conv_filters,
            kernel_size: s.kernel_size,
            pool_size: s.pool_size,
            dense_units: s.dense_units,
            num_classes: self.subtask.num_classes(),
            spatial_dropout_rate: s.spatial_dropout,
            internal_rnn_dropout_rate: s.rnn_dropout,
            dense_dropout: s.dense_dropout,
            embedding_trainable: s.embedding_trainable,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        let spec = self.model_spec(0);
        spec.validate()?;
        if self.settings.max_len < spec.min_sequence_len() {
            return Err(Error::Config(format!(
                "max_len {} is shorter than the {} steps {} needs",
                self.settings.max_len,
                spec.min_sequence_len(),
                self.variant
            )));
        }
        if self.embedding != EmbeddingChoice::None && self.embedding_path.is_none() {
            return Err(Error::Config(format!(
                "no file configured for embeddings `{}`",
                self.embedding.key()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub train_rows: usize,
    pub validation_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub mean_macro_f1: f64,
    pub wall_time_secs: f64,
}

impl RunResult {
    pub fn from_folds(folds: Vec<FoldResult>, wall_time_secs: f64) -> Self {
        let n = folds.len().max(1) as f64;
        Self {
            mean_accuracy: folds.iter().map(|f| f.accuracy).sum::<f64>() / n,
            mean_macro_f1: folds.iter().map(|f| f.macro_f1).sum::<f64>() / n,
            folds,
            wall_time_secs,
        }
    }
}

/// Tokenized rows carrying a label for one subtask.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub subtask: Subtask,
    pub ids: Vec<String>,
    pub tokens: Vec<Vec<String>>,
    pub labels: Vec<usize>,
}

impl PreparedData {
    pub fn prepare(records: &[TweetRecord], subtask: Subtask, cfg: &PipelineConfig) -> Result<Self> {
        let resources = Resources::for_config(cfg)?;
        let rows: Vec<(&TweetRecord, usize)> = records
            .iter()
            .filter_map(|r| r.label(subtask).map(|y| (r, y)))
            .collect();
        if rows.is_empty() {
            return Err(Error::Data(format!("no records carry a subtask {subtask} label")));
        }
        let tokens = rows
            .par_iter()
            .map(|(r, _)| preprocess(&r.text, cfg, &resources))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            subtask,
            ids: rows.iter().map(|(r, _)| r.id.clone()).collect(),
            tokens,
            labels: rows.iter().map(|&(_, y)| y).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn docs(&self, idx: &[usize]) -> (Vec<&[String]>, Vec<usize>) {
        (
            idx.iter().map(|&i| self.tokens[i].as_slice()).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// A trained fold: the model, its vocabulary and its evaluation.
#[derive(Debug, Clone)]
pub struct TrainedFold {
    pub model: Model,
    pub vocab: Vocabulary,
    pub result: FoldResult,
    pub report: EvaluationReport,
}

struct FoldRun<'a> {
    model: Model,
    adam: AdamState,
    trainer: Trainer,
    train: EncodedBatch,
    validation: &'a EncodedBatch,
    weights: Vec<f64>,
}

impl EpochModel for FoldRun<'_> {
    type Snapshot = (Parameters, AdamState);

    fn train_epoch(&mut self, _epoch: usize) -> Result<()> {
        self.trainer
            .epoch(&mut self.model, &self.train, &self.weights, &mut self.adam)
            .map(|_| ())
    }

    fn validation_score(&mut self) -> Result<f64> {
        let pred = self.model.predict(self.validation.sequences.view())?;
        let num_classes = self.model.spec().num_classes;
        Ok(report(&self.validation.labels, &pred, num_classes)?.macro_f1)
    }

    fn snapshot(&self) -> Self::Snapshot {
        (self.model.parameters().clone(), self.adam.clone())
    }

    fn restore(&mut self, (params, adam): Self::Snapshot) {
        *self.model.parameters_mut() = params;
        self.adam = adam;
    }
}

fn encode(data: &PreparedData, idx: &[usize], vocab: &Vocabulary, max_len: usize) -> Result<EncodedBatch> {
    let (docs, labels) = data.docs(idx);
    let docs: Vec<Vec<String>> = docs.into_iter().map(<[String]>::to_vec).collect();
    EncodedBatch::encode(&docs, &labels, vocab, max_len)
}

fn balance_training(
    cell: &CellSpec,
    train: EncodedBatch,
    vocab: &Vocabulary,
    fold: u64,
) -> Result<(EncodedBatch, Vec<f64>)> {
    let c = cell.subtask.num_classes();
    match cell.balance {
        BalanceStrategy::None => Ok((train, vec![1.0; c])),
        BalanceStrategy::ClassWeights => {
            let w = class_weights(&train.labels, c)?.as_f64();
            Ok((train, w))
        }
        BalanceStrategy::Smote => {
            let x: Array2<f64> = train.sequences.mapv(|v| v as f64);
            let cfg = SmoteConfig {
                k_neighbors: cell.settings.smote_k,
                target: SmoteTarget::MatchMajority,
                seed: derive_seed(cell.seed, SeedRole::Smote, fold),
            };
            let (xs, ys) = smote(x.view(), &train.labels, &cfg)?;
            Ok((
                EncodedBatch {
                    sequences: round_to_token_space(xs.view(), vocab.len()),
                    labels: ys,
                },
                vec![1.0; c],
            ))
        }
    }
}

/// Trains on `train`, early-stops on `validation`, and scores on `eval`.
pub fn train_fold(
    cell: &CellSpec,
    data: &PreparedData,
    table: Option<&EmbeddingTable>,
    (train_idx, validation_idx, eval_idx): (&[usize], &[usize], &[usize]),
    fold: u64,
) -> Result<TrainedFold> {
    let s = &cell.settings;
    let (train_docs, _) = data.docs(train_idx);
    let vocab = Vocabulary::build(&train_docs, s.vocab_size, s.min_freq)?;
    let train = encode(data, train_idx, &vocab, s.max_len)?;
    let validation = encode(data, validation_idx, &vocab, s.max_len)?;
    let eval = encode(data, eval_idx, &vocab, s.max_len)?;
    let (train, weights) = balance_training(cell, train, &vocab, fold)?;

    let empty = EmbeddingTable::new();
    let matrix = build_embedding_matrix(
        &vocab,
        table.unwrap_or(&empty),
        cell.embedding_dim(),
        derive_seed(cell.seed, SeedRole::Embedding, fold),
    )?;
    debug!(
        "{} fold {fold}: vocab {} coverage {:.3}, {} training rows",
        cell.cell_id(),
        vocab.len(),
        matrix.coverage,
        train.len()
    );
    let model = Model::new(cell.model_spec(derive_seed(cell.seed, SeedRole::Model, fold)), &matrix)?;
    let adam = AdamState::new(model.parameters(), s.adam)?;
    let trainer = Trainer::new(s.batch_size, derive_seed(cell.seed, SeedRole::Shuffle, fold))?;
    let train_rows = train.len();
    let mut run = FoldRun {
        model,
        adam,
        trainer,
        train,
        validation: &validation,
        weights,
    };
    let outcome = fit_with_early_stopping(&mut run, s.epochs, s.patience)?;
    let pred = run.model.predict(eval.sequences.view())?;
    let rep = report(&eval.labels, &pred, cell.subtask.num_classes())?;
    Ok(TrainedFold {
        model: run.model,
        vocab,
        result: FoldResult {
            accuracy: rep.accuracy,
            macro_f1: rep.macro_f1,
            best_epoch: outcome.best_epoch,
            epochs_run: outcome.epochs_run,
            train_rows,
            validation_history: outcome.history,
        },
        report: rep,
    })
}

/// Result of [`run_cell`] with the model worth keeping.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub result: RunResult,
    pub split: SplitPlan,
    /// Fold with the highest score (the only fold under holdout).
    pub best: TrainedFold,
}

fn map_indices(positions: &[usize], base: &[usize]) -> Vec<usize> {
    positions.iter().map(|&p| base[p]).collect()
}

/// Row indices one fold trains on, early-stops on and is scored on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub eval: Vec<usize>,
}

/// The outer split and the per-fold partitions `run_cell` uses for `labels`.
/// Under cross-validation each fold is scored on its validation fold; under
/// holdout the single partition is scored on the outer test side.
pub fn partitions(cell: &CellSpec, labels: &[usize]) -> Result<(SplitPlan, Vec<Partition>)> {
    let split = stratified_holdout(
        labels,
        cell.settings.holdout_ratio,
        derive_seed(cell.seed, SeedRole::Split, 0),
    )?;
    let train_val_labels: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let parts = match cell.protocol {
        Protocol::CrossValidation { k } => {
            stratified_kfold(&train_val_labels, k, derive_seed(cell.seed, SeedRole::Folds, 0))?
                .folds
                .iter()
                .map(|fold| {
                    let validation = map_indices(&fold.validation, &split.train);
                    Partition {
                        train: map_indices(&fold.train, &split.train),
                        eval: validation.clone(),
                        validation,
                    }
                })
                .collect()
        }
        Protocol::Holdout => {
            let inner = stratified_holdout(
                &train_val_labels,
                cell.settings.inner_ratio,
                derive_seed(cell.seed, SeedRole::InnerSplit, 0),
            )?;
            vec![Partition {
                train: map_indices(&inner.train, &split.train),
                validation: map_indices(&inner.test, &split.train),
                eval: split.test.clone(),
            }]
        }
    };
    Ok((split, parts))
}

pub fn run_cell(cell: &CellSpec, data: &PreparedData, table: Option<&EmbeddingTable>) -> Result<CellOutcome> {
    cell.validate()?;
    if data.subtask != cell.subtask {
        return Err(Error::Config(format!(
            "data prepared for subtask {} but cell targets {}",
            data.subtask, cell.subtask
        )));
    }
    let start = Instant::now();
    let id = cell.cell_id();
    let (split, parts) = partitions(cell, &data.labels)?;
    let run = |(f, p): (usize, &Partition)| train_fold(cell, data, table, (&p.train, &p.validation, &p.eval), f as u64);
    let folds: Vec<TrainedFold> = match cell.protocol {
        Protocol::CrossValidation { .. } => parts
            .par_iter()
            .enumerate()
            .map(|(f, p)| run((f, p)).map_err(|e| e.context(format!("{id} fold {}", f + 1))))
            .collect::<Result<_>>()?,
        Protocol::Holdout => vec![run((0, &parts[0])).map_err(|e| e.context(&id))?],
    };
    let result = RunResult::from_folds(
        folds.iter().map(|f| f.result.clone()).collect(),
        start.elapsed().as_secs_f64(),
    );
    info!(
        "{id}: accuracy {:.4}, macro F1 {:.4} ({:.1}s)",
        result.mean_accuracy, result.mean_macro_f1, result.wall_time_secs
    );
    let best = folds
        .into_iter()
        .reduce(|a, b| if b.result.macro_f1 > a.result.macro_f1 { b } else { a })
        .expect("at least one fold");
    Ok(CellOutcome { result, split, best })
}
