use num_rational::Ratio;

use crate::error::{Error, Result};

/// Per-class loss multipliers `N / (C · N_c)`, kept exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassWeightTable {
    weights: Vec<Ratio<u64>>,
}

impl ClassWeightTable {
    /// All weights 1.
    pub fn uniform(num_classes: usize) -> Self {
        Self {
            weights: vec![Ratio::from_integer(1); num_classes],
        }
    }

    pub fn exact(&self) -> &[Ratio<u64>] {
        &self.weights
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| *w.numer() as f64 / *w.denom() as f64)
            .collect()
    }

    pub fn get(&self, class: usize) -> f64 {
        let w = self.weights[class];
        *w.numer() as f64 / *w.denom() as f64
    }

    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }
}

pub fn class_weights(labels: &[usize], num_classes: usize) -> Result<ClassWeightTable> {
    let counts = class_counts(labels, num_classes)?;
    class_weights_from_counts(&counts)
}

pub fn class_weights_from_counts(counts: &[u64]) -> Result<ClassWeightTable> {
    let total: u64 = counts.iter().sum();
    let c = counts.len() as u64;
    let weights = counts
        .iter()
        .enumerate()
        .map(|(class, &n)| {
            if n == 0 {
                Err(Error::Data(format!("class {class} has no examples; weight undefined")))
            } else {
                Ok(Ratio::new(total, c * n))
            }
        })
        .collect::<Result<_>>()?;
    Ok(ClassWeightTable { weights })
}

pub fn class_counts(labels: &[usize], num_classes: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; num_classes];
    for &y in labels {
        *counts
            .get_mut(y)
            .ok_or_else(|| Error::Data(format!("label {y} out of range for {num_classes} classes")))? += 1;
    }
    Ok(counts)
}
