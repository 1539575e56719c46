//! Brute-force oracles shared by the integration tests. Each one recomputes a
//! library result the slow, obvious way.
#![allow(dead_code)]

pub mod grad;

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashSet};

use olid_core::harness::{FoldPlan, SplitPlan};

/// Per-class (precision, recall, f1), accuracy and macro F1 by recounting
/// TP/FP/FN directly from the label pairs.
pub struct Recount {
    pub accuracy: f64,
    pub per_class: Vec<(f64, f64, f64)>,
    pub macro_f1: f64,
}

fn safe_div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn recount(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Recount {
    let pairs: Vec<(usize, usize)> = y_true.iter().copied().zip(y_pred.iter().copied()).collect();
    let per_class: Vec<(f64, f64, f64)> = (0..num_classes)
        .map(|c| {
            let tp = pairs.iter().filter(|&&(t, p)| t == c && p == c).count();
            let fp = pairs.iter().filter(|&&(t, p)| t != c && p == c).count();
            let fn_ = pairs.iter().filter(|&&(t, p)| t == c && p != c).count();
            let p = safe_div(tp, tp + fp);
            let r = safe_div(tp, tp + fn_);
            let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
            (p, r, f)
        })
        .collect();
    let hits = pairs.iter().filter(|(t, p)| t == p).count();
    Recount {
        accuracy: safe_div(hits, pairs.len()),
        macro_f1: per_class.iter().map(|s| s.2).sum::<f64>() / num_classes as f64,
        per_class,
    }
}

/// Textbook full-matrix optimal string alignment distance.
pub fn osa(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, v) in d[0].iter_mut().enumerate() {
        *v = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                d[i][j] = d[i][j].min(d[i - 2][j - 2] + 1);
            }
        }
    }
    d[a.len()][b.len()]
}

/// Exhaustive-scan correction: the closest word within `max`, ties broken by
/// higher frequency then lexicographic order.
pub fn scan_correct(dict: &[(String, u64)], token: &str, max: usize) -> String {
    dict.iter()
        .map(|(w, f)| (osa(token, w), Reverse(*f), w.as_str()))
        .filter(|&(d, _, _)| d <= max)
        .min()
        .map_or_else(|| token.to_string(), |(_, _, w)| w.to_string())
}

/// k nearest other rows by sorting all distances; ties go to the lower index.
pub fn knn(rows: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..rows.len())
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..rows.len())
                .filter(|&j| j != i)
                .map(|j| (rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum(), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Distance from `p` to the segment between `a` and `b`.
pub fn segment_residual(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (p.iter().zip(a).zip(&ab).map(|((p, a), d)| (p - a) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    p.iter()
        .zip(a)
        .zip(&ab)
        .map(|((p, a), d)| (p - (a + t * d)).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn class_counts(labels: &[usize], idx: &[usize]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for &i in idx {
        *out.entry(labels[i]).or_insert(0) += 1;
    }
    out
}

fn check_partition(n: usize, parts: &[&[usize]]) -> Result<(), String> {
    let mut seen = HashSet::new();
    for part in parts {
        for &i in *part {
            if i >= n {
                return Err(format!("index {i} out of range"));
            }
            if !seen.insert(i) {
                return Err(format!("index {i} appears twice"));
            }
        }
    }
    if seen.len() != n {
        return Err(format!("{} of {n} rows covered", seen.len()));
    }
    Ok(())
}

/// Disjointness, coverage and the one-example stratification bound.
pub fn check_holdout(labels: &[usize], plan: &SplitPlan, ratio: f64) -> Result<(), String> {
    check_partition(labels.len(), &[&plan.train, &plan.test])?;
    let all = class_counts(labels, &(0..labels.len()).collect::<Vec<_>>());
    let train = class_counts(labels, &plan.train);
    for (c, &n) in &all {
        let got = *train.get(c).unwrap_or(&0) as f64;
        if (got - ratio * n as f64).abs() > 1.0 {
            return Err(format!("class {c}: {got} of {n} in train at ratio {ratio}"));
        }
    }
    Ok(())
}

pub fn check_kfold(labels: &[usize], plan: &FoldPlan, k: usize) -> Result<(), String> {
    if plan.folds.len() != k {
        return Err(format!("{} folds, expected {k}", plan.folds.len()));
    }
    let validations: Vec<&[usize]> = plan.folds.iter().map(|f| f.validation.as_slice()).collect();
    check_partition(labels.len(), &validations)?;
    let all = class_counts(labels, &(0..labels.len()).collect::<Vec<_>>());
    for (f, fold) in plan.folds.iter().enumerate() {
        check_partition(labels.len(), &[&fold.train, &fold.validation]).map_err(|e| format!("fold {f}: {e}"))?;
        let got = class_counts(labels, &fold.validation);
        for (c, &n) in &all {
            let v = *got.get(c).unwrap_or(&0) as f64;
            if (v - n as f64 / k as f64).abs() > 1.0 {
                return Err(format!("fold {f} class {c}: {v} of {n}"));
            }
        }
    }
    Ok(())
}
