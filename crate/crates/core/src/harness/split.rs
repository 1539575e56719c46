use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Train/test partition of row positions, each side sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }
}

fn by_class(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        groups.entry(y).or_default().push(i);
    }
    groups
}

/// Per-class shuffled split; each class sends `round(ratio * n_c)` rows
/// (at least one, at most `n_c - 1`) to the train side.
pub fn stratified_holdout(labels: &[usize], ratio: f64, seed: u64) -> Result<SplitPlan> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("holdout ratio must be in (0, 1), got {ratio}")));
    }
    let groups = by_class(labels);
    if let Some((class, members)) = groups.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::Data(format!(
            "class {class} has {} example(s); a stratified split needs at least 2",
            members.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut members in groups.into_values() {
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { train, test, seed })
}

/// Deals each class's shuffled rows round-robin over `k` folds. Each class
/// starts where the previous one stopped, which keeps fold sizes within
/// one of each other overall as well as per class.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let groups = by_class(labels);
    if let Some((class, members)) = groups.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::Data(format!(
            "class {class} has {} example(s), fewer than the {k} folds",
            members.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned = vec![Vec::new(); k];
    let mut offset = 0;
    for mut members in groups.into_values() {
        members.shuffle(&mut rng);
        for (j, idx) in members.iter().enumerate() {
            assigned[(offset + j) % k].push(*idx);
        }
        offset = (offset + members.len()) % k;
    }
    let folds = (0..k)
        .map(|f| {
            let mut validation = assigned[f].clone();
            validation.sort_unstable();
            let mut train: Vec<usize> = (0..k)
                .filter(|&g| g != f)
                .flat_map(|g| assigned[g].iter().copied())
                .collect();
            train.sort_unstable();
            Fold { train, validation }
        })
        .collect();
    Ok(FoldPlan { folds, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_labels_at_eighty_percent() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let p = stratified_holdout(&labels, 0.8, 3).unwrap();
        assert_eq!((p.train.len(), p.test.len()), (8, 2));
        assert_eq!(p.test.iter().filter(|&&i| labels[i] == 0).count(), 1);
        assert_eq!(p, stratified_holdout(&labels, 0.8, 3).unwrap());
    }

    #[test]
    fn half_split_of_four() {
        let labels = [0, 1, 0, 1];
        let p = stratified_holdout(&labels, 0.5, 9).unwrap();
        for side in [&p.train, &p.test] {
            let mut l: Vec<_> = side.iter().map(|&i| labels[i]).collect();
            l.sort();
            assert_eq!(l, vec![0, 1]);
        }
    }

    #[test]
    fn singleton_class_is_named() {
        let err = stratified_holdout(&[0, 0, 2], 0.8, 0).unwrap_err();
        assert!(err.to_string().contains("class 2"), "{err}");
        assert!(stratified_holdout(&[0, 0, 1, 1], 1.0, 0).is_err());
    }

    #[test]
    fn kfold_balanced_pairs() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let plan = stratified_kfold(&labels, 5, 1).unwrap();
        let mut all: Vec<usize> = plan.folds.iter().flat_map(|f| f.validation.clone()).collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        for f in &plan.folds {
            assert_eq!(f.validation.len(), 2);
            assert_eq!(f.validation.iter().filter(|&&i| labels[i] == 0).count(), 1);
            assert_eq!(f.train.len(), 8);
        }
        assert!(stratified_kfold(&[0, 0, 1], 2, 0).is_err());
    }
}
