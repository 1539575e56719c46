use std::collections::BTreeMap;
use std::path::PathBuf;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::{run_cell, BalanceStrategy, CellSpec, GridKind, PreparedData, Protocol, RunResult, RunSettings};
use crate::data::{Subtask, TweetRecord};
use crate::error::{Error, Result};
use crate::neuralnet::Variant;
use crate::preprocess::PipelineConfig;
use crate::representation::{load_embeddings, EmbeddingChoice, EmbeddingTable};

pub const IMBALANCE_VARIANTS: [Variant; 4] = [Variant::BiLstmCnn, Variant::BiGruCnn, Variant::BiLstm, Variant::BiGru];
pub const SWEEP_VARIANTS: [Variant; 2] = [Variant::BiLstmCnn, Variant::BiGruCnn];
pub const SWEEP_EPOCHS: [usize; 3] = [5, 10, 20];
/// A rate of zero stands for "no dropout".
pub const SWEEP_DROPOUT: [f64; 4] = [0.2, 0.35, 0.5, 0.0];

/// What to run. Built from a config file or directly in code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: GridKind,
    pub subtask: Subtask,
    /// Empty means the grid's default list.
    pub variants: Vec<Variant>,
    pub balance: BalanceStrategy,
    pub embedding: EmbeddingChoice,
    pub embedding_paths: BTreeMap<EmbeddingChoice, PathBuf>,
    pub protocol: Protocol,
    pub seed: u64,
    pub settings: RunSettings,
    pub preprocess: PipelineConfig,
    pub sweep_epochs: Vec<usize>,
    pub sweep_dropout: Vec<f64>,
    pub sweep_embeddings: Vec<EmbeddingChoice>,
    /// OLID files to combine; empty means the caller supplies data.
    pub data_paths: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(grid: GridKind, subtask: Subtask) -> Self {
        Self {
            grid,
            subtask,
            variants: Vec::new(),
            balance: BalanceStrategy::None,
            embedding: EmbeddingChoice::None,
            embedding_paths: BTreeMap::new(),
            protocol: Protocol::default_for(subtask),
            seed: 42,
            settings: RunSettings::default(),
            preprocess: PipelineConfig::default(),
            sweep_epochs: SWEEP_EPOCHS.to_vec(),
            sweep_dropout: SWEEP_DROPOUT.to_vec(),
            sweep_embeddings: EmbeddingChoice::ALL.to_vec(),
            data_paths: Vec::new(),
        }
    }

    fn variants_or(&self, default: &[Variant]) -> Vec<Variant> {
        if self.variants.is_empty() {
            default.to_vec()
        } else {
            self.variants.clone()
        }
    }

    fn cell(&self, variant: Variant) -> CellSpec {
        CellSpec {
            grid: self.grid,
            subtask: self.subtask,
            variant,
            balance: self.balance,
            embedding: self.embedding,
            embedding_path: self.embedding_paths.get(&self.embedding).cloned(),
            protocol: self.protocol,
            settings: self.settings.clone(),
            preprocess: self.preprocess.clone(),
            seed: self.seed,
        }
    }

    /// Cells in grid order: variants outermost, the swept axis inner.
    pub fn plan(&self) -> Result<Vec<CellSpec>> {
        self.settings.validate()?;
        let cells: Vec<CellSpec> = match self.grid {
            GridKind::Single => {
                let v = self.variants_or(&[Variant::BiLstmCnn]);
                if v.len() != 1 {
                    return Err(Error::Config("a single run takes exactly one variant".into()));
                }
                vec![self.cell(v[0])]
            }
            GridKind::Architectures => self
                .variants_or(&Variant::ALL)
                .into_iter()
                .map(|v| self.cell(v))
                .collect(),
            GridKind::Imbalance => self
                .variants_or(&IMBALANCE_VARIANTS)
                .into_iter()
                .flat_map(|v| {
                    BalanceStrategy::ALL.into_iter().map(move |b| CellSpec {
                        balance: b,
                        ..self.cell(v)
                    })
                })
                .collect(),
            GridKind::Epochs => self
                .variants_or(&SWEEP_VARIANTS)
                .into_iter()
                .flat_map(|v| {
                    self.sweep_epochs.iter().map(move |&e| {
                        let mut c = self.cell(v);
                        c.settings.epochs = e;
                        c.settings.patience = None;
                        c
                    })
                })
                .collect(),
            GridKind::Dropout => self
                .variants_or(&SWEEP_VARIANTS)
                .into_iter()
                .flat_map(|v| {
                    self.sweep_dropout.iter().map(move |&r| {
                        let mut c = self.cell(v);
                        c.settings.spatial_dropout = r;
                        c
                    })
                })
                .collect(),
            GridKind::Embeddings => self
                .variants_or(&SWEEP_VARIANTS)
                .into_iter()
                .flat_map(|v| {
                    self.sweep_embeddings.iter().map(move |&e| CellSpec {
                        embedding: e,
                        embedding_path: self.embedding_paths.get(&e).cloned(),
                        ..self.cell(v)
                    })
                })
                .collect(),
        };
        let mut seen = std::collections::HashSet::new();
        for c in &cells {
            if !seen.insert(c.cell_id()) {
                return Err(Error::Config(format!("grid repeats cell `{}`", c.cell_id())));
            }
        }
        Ok(cells)
    }
}

/// One grid row: the cell and either its result or why it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub cell: CellSpec,
    pub outcome: std::result::Result<RunResult, String>,
}

fn load_tables(cells: &[CellSpec]) -> BTreeMap<(PathBuf, usize), std::result::Result<EmbeddingTable, String>> {
    let mut wanted: Vec<(PathBuf, usize)> = cells
        .iter()
        .filter_map(|c| Some((c.embedding_path.clone()?, c.embedding.dimension()?)))
        .collect();
    wanted.sort();
    wanted.dedup();
    wanted
        .into_par_iter()
        .map(|(p, d)| {
            let t = load_embeddings(&p, d).map_err(|e| e.to_string());
            ((p, d), t)
        })
        .collect()
}

/// Runs every cell of `config` on `records`. Cells run in parallel and are
/// returned in grid order. A cell whose embeddings cannot be loaded, or
/// whose training fails, is reported as failed without stopping the grid;
/// `on_done` sees each row as it finishes.
pub fn run_grid<F>(config: &ExperimentConfig, records: &[TweetRecord], on_done: F) -> Result<Vec<GridRow>>
where
    F: Fn(&GridRow) + Sync,
{
    let cells = config.plan()?;
    let data = PreparedData::prepare(records, config.subtask, &config.preprocess)?;
    run_cells(&cells, &data, on_done)
}

pub fn run_cells<F>(cells: &[CellSpec], data: &PreparedData, on_done: F) -> Result<Vec<GridRow>>
where
    F: Fn(&GridRow) + Sync,
{
    for c in cells {
        if c.embedding != EmbeddingChoice::None && c.embedding_path.is_none() {
            continue;
        }
        c.validate()?;
    }
    let tables = load_tables(cells);
    let rows = cells
        .par_iter()
        .map(|cell| {
            let run = |t: Option<&EmbeddingTable>| run_cell(cell, data, t).map(|o| o.result).map_err(|e| e.to_string());
            let outcome = match (&cell.embedding_path, cell.embedding.dimension()) {
                (_, None) => run(None),
                (None, Some(_)) => Err(format!("no file configured for embeddings `{}`", cell.embedding.key())),
                (Some(p), Some(d)) => match &tables[&(p.clone(), d)] {
                    Ok(t) => run(Some(t)),
                    Err(e) => Err(e.clone()),
                },
            };
            if let Err(e) = &outcome {
                warn!("{} failed: {e}", cell.cell_id());
            }
            let row = GridRow {
                cell: cell.clone(),
                outcome,
            };
            on_done(&row);
            row
        })
        .collect();
    Ok(rows)
}
