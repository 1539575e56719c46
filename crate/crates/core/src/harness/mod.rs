//! Splitting, cross-validation with early stopping, and the experiment
//! grids behind the result tables.

mod cell;
mod config;
mod early;
mod grid;
mod seeds;
mod split;

pub use cell::{
    dropout_label, partitions, run_cell, train_fold, BalanceStrategy, CellOutcome, CellSpec, FoldResult, GridKind,
    Partition, PreparedData, Protocol, RunResult, RunSettings, TrainedFold,
};
pub use config::{load_config, parse_config, CONFIG_REFERENCE};
pub use early::{fit_with_early_stopping, EpochModel, StoppingOutcome};
pub use grid::{
    run_cells, run_grid, ExperimentConfig, GridRow, IMBALANCE_VARIANTS, SWEEP_DROPOUT, SWEEP_EPOCHS, SWEEP_VARIANTS,
};
pub use seeds::{derive_seed, SeedRole};
pub use split::{stratified_holdout, stratified_kfold, Fold, FoldPlan, SplitPlan};
