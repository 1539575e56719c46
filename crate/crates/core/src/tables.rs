//! Renders stored grid results in the layout of the published tables.
//!
//! | Table | Grid | Rows | Columns |
//! |---|---|---|---|
//! | 2 | architectures, subtask A | 13 variants | accuracy, macro F1 |
//! | 3, 4 | imbalance, subtask B / C | 4 variants | accuracy and macro F1 per strategy |
//! | 5 | epochs | 5, 10, 20 | BiLSTM-CNN, BiGRU-CNN |
//! | 6 | dropout | 20%, 35%, 50%, none | BiLSTM-CNN, BiGRU-CNN |
//! | 7 | embeddings | four embedding choices | BiLSTM-CNN, BiGRU-CNN |

use std::str::FromStr;

use crate::data::Subtask;
use crate::error::{Error, Result};
use crate::harness::{
    BalanceStrategy, GridKind, RunResult, IMBALANCE_VARIANTS, SWEEP_DROPOUT, SWEEP_EPOCHS, SWEEP_VARIANTS,
};
use crate::neuralnet::Variant;
use crate::representation::EmbeddingChoice;
use crate::store::{CellStatus, StoredCell};

pub const MISSING: &str = "-";
pub const FAILED: &str = "failed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(Error::Config(format!(
                "unknown table format `{s}` (expected md or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Markdown => {
                let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
                let mut out = line(&self.header);
                out.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
                for r in &self.rows {
                    out.push_str(&line(r));
                }
                out
            }
            TableFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in std::iter::once(&self.header).chain(&self.rows) {
                    w.write_record(r).expect("writing to memory");
                }
                String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
            }
        }
    }
}

fn lookup(entries: &[StoredCell], pred: impl Fn(&StoredCell) -> bool) -> Option<&CellStatus> {
    // Later entries win if a cell was recorded more than once across stores.
    entries.iter().rev().find(|e| pred(e)).map(|e| &e.status)
}

fn cell_text(status: Option<&CellStatus>, fmt: impl Fn(&RunResult) -> String) -> String {
    match status {
        None => MISSING.to_string(),
        Some(CellStatus::Failed(_)) => FAILED.to_string(),
        Some(CellStatus::Completed(r)) => fmt(r),
    }
}

fn f1(r: &RunResult) -> String {
    format!("{:.2}", r.mean_macro_f1)
}

fn sweep_table<K: Copy>(
    entries: &[StoredCell],
    subtask: Subtask,
    grid: GridKind,
    first: &str,
    keys: &[(K, &str)],
    matches: impl Fn(&StoredCell, K) -> bool,
) -> Table {
    let header = std::iter::once(first.to_string())
        .chain(SWEEP_VARIANTS.iter().map(|v| v.name().to_string()))
        .collect();
    let rows = keys
        .iter()
        .map(|&(k, label)| {
            std::iter::once(label.to_string())
                .chain(SWEEP_VARIANTS.iter().map(|&v| {
                    let s = lookup(entries, |e| {
                        e.config.grid == grid && e.config.subtask == subtask && e.config.variant == v && matches(e, k)
                    });
                    cell_text(s, f1)
                }))
                .collect()
        })
        .collect();
    Table { header, rows }
}

/// Builds table `number` (2 to 7). Sweep tables 5 to 7 read cells of
/// `sweep_subtask`.
pub fn build_table(number: u8, entries: &[StoredCell], sweep_subtask: Subtask) -> Result<Table> {
    match number {
        2 => Ok(Table {
            header: vec!["Models (Subtask A)".into(), "Avg Acc".into(), "Avg Macro F1".into()],
            rows: Variant::ALL
                .iter()
                .map(|&v| {
                    let s = lookup(entries, |e| {
                        e.config.grid == GridKind::Architectures
                            && e.config.subtask == Subtask::A
                            && e.config.variant == v
                    });
                    vec![
                        v.name().to_string(),
                        cell_text(s, |r| format!("{:.0}%", r.mean_accuracy * 100.0)),
                        cell_text(s, f1),
                    ]
                })
                .collect(),
        }),
        3 | 4 => {
            let subtask = if number == 3 { Subtask::B } else { Subtask::C };
            let mut header = vec![format!("Models (Subtask {subtask})")];
            for name in ["Imbalanced Data", "SMOTE", "Class Weights"] {
                header.push(format!("{name} Acc"));
                header.push(format!("{name} Macro F1"));
            }
            let rows = IMBALANCE_VARIANTS
                .iter()
                .map(|&v| {
                    let mut row = vec![v.name().to_string()];
                    for b in BalanceStrategy::ALL {
                        let s = lookup(entries, |e| {
                            e.config.grid == GridKind::Imbalance
                                && e.config.subtask == subtask
                                && e.config.variant == v
                                && e.config.balance == b
                        });
                        row.push(cell_text(s, |r| format!("{:.2}%", r.mean_accuracy * 100.0)));
                        row.push(cell_text(s, f1));
                    }
                    row
                })
                .collect();
            Ok(Table { header, rows })
        }
        5 => {
            let keys: Vec<(usize, String)> = SWEEP_EPOCHS.iter().map(|&e| (e, e.to_string())).collect();
            let keys: Vec<(usize, &str)> = keys.iter().map(|(k, l)| (*k, l.as_str())).collect();
            Ok(sweep_table(
                entries,
                sweep_subtask,
                GridKind::Epochs,
                "Epochs",
                &keys,
                |e, k| e.config.settings.epochs == k,
            ))
        }
        6 => {
            let labels = ["20%", "35%", "50%", "No Dropout"];
            let keys: Vec<(f64, &str)> = SWEEP_DROPOUT.iter().copied().zip(labels).collect();
            Ok(sweep_table(
                entries,
                sweep_subtask,
                GridKind::Dropout,
                "Dropout",
                &keys,
                |e, k| (e.config.settings.spatial_dropout - k).abs() < 1e-9,
            ))
        }
        7 => {
            let keys = [
                (EmbeddingChoice::Twitter100, "T - 100d"),
                (EmbeddingChoice::Twitter200, "T - 200d"),
                (EmbeddingChoice::CommonCrawl300, "CC - 300d"),
                (EmbeddingChoice::None, "No Embs"),
            ];
            Ok(sweep_table(
                entries,
                sweep_subtask,
                GridKind::Embeddings,
                "Embeddings",
                &keys,
                |e, k| e.config.embedding == k,
            ))
        }
        _ => Err(Error::Config(format!("no table {number}; choose 2 to 7"))),
    }
}

pub fn render_table(number: u8, entries: &[StoredCell], sweep_subtask: Subtask, format: TableFormat) -> Result<String> {
    Ok(build_table(number, entries, sweep_subtask)?.render(format))
}
