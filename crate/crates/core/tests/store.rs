use std::sync::Arc;

use olid_core::data::Subtask;
use olid_core::fixture::fixture_records;
use olid_core::harness::{
    run_cell, CellSpec, ExperimentConfig, FoldResult, GridKind, PreparedData, Protocol, RunResult,
};
use olid_core::store::{CellStatus, ResultsStore, StoredCell};
use olid_core::tables::{render_table, TableFormat};
use tempfile::TempDir;

fn fold(acc: f64, f1: f64) -> FoldResult {
    FoldResult {
        accuracy: acc,
        macro_f1: f1,
        best_epoch: 3,
        epochs_run: 5,
        train_rows: 100,
        validation_history: vec![0.25, 0.5, f1, f1, f1],
    }
}

fn stored(cell: CellSpec, acc: f64, f1: f64) -> StoredCell {
    StoredCell {
        cell_id: cell.cell_id(),
        config: cell,
        status: CellStatus::Completed(RunResult::from_folds(vec![fold(acc, f1)], 1.5)),
        timestamp: 1_700_000_000,
    }
}

fn cells(grid: GridKind, subtask: Subtask) -> Vec<CellSpec> {
    ExperimentConfig::new(grid, subtask).plan().unwrap()
}

#[test]
fn entries_round_trip_in_append_order() {
    let dir = TempDir::new().unwrap();
    let store = ResultsStore::open(dir.path()).unwrap();
    let written: Vec<StoredCell> = cells(GridKind::Architectures, Subtask::A)
        .into_iter()
        .enumerate()
        .map(|(i, c)| stored(c, 0.5 + i as f64 / 100.0, 0.1 + i as f64 / 3.0 / 10.0))
        .collect();
    for c in &written {
        store.append(c).unwrap();
    }
    let reopened = ResultsStore::open(dir.path()).unwrap();
    assert_eq!(reopened.entries().unwrap(), written);
    assert_eq!(reopened.get(&written[4].cell_id).unwrap(), written[4]);
    assert!(reopened.contains("architectures-A-CNN"));
    assert!(!reopened.contains("architectures-A-Transformer"));
    assert!(reopened.append(&written[0]).is_err());
}

#[test]
fn concurrent_appends_all_land() {
    let dir = TempDir::new().unwrap();
    let store = Arc::new(ResultsStore::open(dir.path()).unwrap());
    let all = cells(GridKind::Dropout, Subtask::A);
    std::thread::scope(|s| {
        for c in &all {
            let store = Arc::clone(&store);
            s.spawn(move || store.append(&stored(c.clone(), 0.9, 0.8)).unwrap());
        }
    });
    let mut ids: Vec<String> = store.entries().unwrap().into_iter().map(|e| e.cell_id).collect();
    ids.sort();
    let mut expected: Vec<String> = all.iter().map(CellSpec::cell_id).collect();
    expected.sort();
    assert_eq!(ids, expected);
    let index = std::fs::read_to_string(dir.path().join("index.tsv")).unwrap();
    assert_eq!(index.lines().count(), all.len() + 1);
}

#[test]
fn stored_config_reruns_to_the_same_numbers() {
    let mut cfg = ExperimentConfig::new(GridKind::Single, Subtask::A);
    cfg.protocol = Protocol::CrossValidation { k: 3 };
    cfg.settings.epochs = 3;
    cfg.settings.embedding_dim = 8;
    cfg.settings.rnn_units = 8;
    cfg.settings.conv_filters = 8;
    cfg.settings.dense_units = 8;
    cfg.settings.max_len = 12;
    let cell = cfg.plan().unwrap().remove(0);
    let data = PreparedData::prepare(&fixture_records(), Subtask::A, &cfg.preprocess).unwrap();
    let first = run_cell(&cell, &data, None).unwrap().result;

    let dir = TempDir::new().unwrap();
    let store = ResultsStore::open(dir.path()).unwrap();
    store
        .append(&StoredCell {
            cell_id: cell.cell_id(),
            config: cell.clone(),
            status: CellStatus::Completed(first.clone()),
            timestamp: 0,
        })
        .unwrap();
    let entry = ResultsStore::open(dir.path()).unwrap().get(&cell.cell_id()).unwrap();
    let again = run_cell(&entry.config, &data, None).unwrap().result;
    let numbers = |r: &RunResult| {
        (
            r.mean_accuracy,
            r.mean_macro_f1,
            r.folds.iter().map(|f| f.macro_f1).collect::<Vec<_>>(),
        )
    };
    assert_eq!(numbers(&again), numbers(entry.result().unwrap()));
}

#[test]
fn table_two_lists_every_variant_in_order() {
    let entries: Vec<StoredCell> = cells(GridKind::Architectures, Subtask::A)
        .into_iter()
        .rev()
        .enumerate()
        .map(|(i, c)| stored(c, 0.6 + i as f64 / 100.0, 0.7 + i as f64 / 200.0))
        .collect();
    let md = render_table(2, &entries, Subtask::A, TableFormat::Markdown).unwrap();
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines[0], "| Models (Subtask A) | Avg Acc | Avg Macro F1 |");
    assert_eq!(lines.len(), 2 + 13);
    assert_eq!(lines[2], "| CNN | 72% | 0.76 |");
    assert_eq!(lines[14], "| BiGRU-CNN | 60% | 0.70 |");
}

#[test]
fn missing_and_failed_cells_are_marked() {
    let mut plan = cells(GridKind::Imbalance, Subtask::C);
    let failed = plan.remove(0);
    let mut entries = vec![StoredCell {
        cell_id: failed.cell_id(),
        config: failed,
        status: CellStatus::Failed("numeric error: boom".into()),
        timestamp: 0,
    }];
    entries.extend(plan.into_iter().skip(1).map(|c| stored(c, 0.5, 0.25)));
    let csv = render_table(4, &entries, Subtask::A, TableFormat::Csv).unwrap();
    let first_row = csv.lines().nth(1).unwrap();
    assert_eq!(first_row, "BiLSTM-CNN,failed,failed,-,-,50.00%,0.25");
}
