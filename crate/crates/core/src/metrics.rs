//! Accuracy, per-class precision/recall/F1, macro F1 and confusion matrices.
//!
//! Undefined ratios (zero denominators) score 0, and the macro average always
//! divides by the full class count, including classes absent from both vectors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassScores>,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= num_classes || p >= num_classes {
            return Err(Error::Data(format!(
                "label pair ({t}, {p}) out of range for {num_classes} classes"
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvaluationReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self> {
        let total = confusion.total();
        if total == 0 {
            return Err(Error::Data("cannot score an empty evaluation set".into()));
        }
        let c = confusion.num_classes();
        let per_class: Vec<ClassScores> = (0..c)
            .map(|k| {
                let tp = confusion.counts[k][k];
                let fp: u64 = (0..c).filter(|&t| t != k).map(|t| confusion.counts[t][k]).sum();
                let fn_: u64 = (0..c).filter(|&p| p != k).map(|p| confusion.counts[k][p]).sum();
                let precision = ratio(tp, tp + fp);
                let recall = ratio(tp, tp + fn_);
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                ClassScores { precision, recall, f1 }
            })
            .collect();
        let macro_f1 = per_class.iter().map(|s| s.f1).sum::<f64>() / c as f64;
        Ok(Self {
            accuracy: ratio(confusion.trace(), total),
            per_class,
            macro_f1,
            confusion,
        })
    }

    /// Flat `key = value` lines.
    pub fn to_key_values(&self, class_names: &[&str]) -> String {
        let name = |k: usize| {
            class_names
                .get(k)
                .map(|s| s.to_string())
                .unwrap_or_else(|| k.to_string())
        };
        let mut s = String::new();
        let _ = writeln!(s, "accuracy = {:.6}", self.accuracy);
        let _ = writeln!(s, "macro_f1 = {:.6}", self.macro_f1);
        for (k, cs) in self.per_class.iter().enumerate() {
            let n = name(k);
            let _ = writeln!(s, "precision.{n} = {:.6}", cs.precision);
            let _ = writeln!(s, "recall.{n} = {:.6}", cs.recall);
            let _ = writeln!(s, "f1.{n} = {:.6}", cs.f1);
        }
        for (t, row) in self.confusion.counts.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "confusion.{} = {}", name(t), cells.join(" "));
        }
        s
    }
}

pub fn report(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<EvaluationReport> {
    EvaluationReport::from_confusion(confusion_matrix(y_true, y_pred, num_classes)?)
}
