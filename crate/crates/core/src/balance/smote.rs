use std::collections::BTreeMap;

use log::warn;
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// How many rows each class should end up with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoteTarget {
    MatchMajority,
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub target: SmoteTarget,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: DEFAULT_K_NEIGHBORS,
            target: SmoteTarget::MatchMajority,
            seed: 0,
        }
    }
}

fn squared_distance(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For each row, the `k` nearest other rows by Euclidean distance; ties go to
/// the lower index.
pub fn nearest_neighbors(x: ArrayView2<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Data(format!("need at least 2 rows for neighbours, got {n}")));
    }
    if k == 0 || k >= n {
        return Err(Error::Config(format!("k must be in 1..{n}, got {k}")));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for j in (0..n).filter(|&j| j != i) {
            let d = squared_distance(x.row(i), x.row(j));
            // j increases, so inserting after equal distances keeps lower indices first
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            if pos < k {
                best.insert(pos, (d, j));
                best.truncate(k);
            }
        }
        out.push(best.into_iter().map(|(_, j)| j).collect());
    }
    Ok(out)
}

/// Oversamples every class below the target by interpolating between a row
/// and one of its nearest same-class neighbours. Original rows come first,
/// unchanged; synthetic rows follow, grouped by ascending class.
pub fn smote(x: ArrayView2<f64>, y: &[usize], cfg: &SmoteConfig) -> Result<(Array2<f64>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    smote_with_rng(x, y, cfg, &mut rng)
}

pub fn smote_with_rng<R: Rng + ?Sized>(
    x: ArrayView2<f64>,
    y: &[usize],
    cfg: &SmoteConfig,
    rng: &mut R,
) -> Result<(Array2<f64>, Vec<usize>)> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if cfg.k_neighbors == 0 {
        return Err(Error::Config("k_neighbors must be >= 1".into()));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in y.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    let majority = members.values().map(Vec::len).max().unwrap_or(0);
    let target = match cfg.target {
        SmoteTarget::MatchMajority => majority,
        SmoteTarget::Count(t) if t >= majority => t,
        SmoteTarget::Count(t) => {
            return Err(Error::Config(format!(
                "target count {t} is below the largest class size {majority}"
            )))
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (&class, idx) in &members {
        let need = target - idx.len();
        if need == 0 {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::Data(format!(
                "class {class} has a single example; SMOTE needs a neighbour"
            )));
        }
        let k = if cfg.k_neighbors >= idx.len() {
            warn!(
                "class {class}: k_neighbors {} reduced to {} (class size {})",
                cfg.k_neighbors,
                idx.len() - 1,
                idx.len()
            );
            idx.len() - 1
        } else {
            cfg.k_neighbors
        };
        let sub = x.select(ndarray::Axis(0), idx);
        let nn = nearest_neighbors(sub.view(), k)?;
        for _ in 0..need {
            let base = rng.gen_range(0..idx.len());
            let other = if k == 1 {
                nn[base][0]
            } else {
                nn[base][rng.gen_range(0..k)]
            };
            let u: f64 = rng.gen();
            let a = sub.row(base);
            let b = sub.row(other);
            rows.push(a.iter().zip(b.iter()).map(|(&p, &q)| p + u * (q - p)).collect());
            labels.push(class);
        }
    }

    let d = x.ncols();
    let mut out = Array2::zeros((x.nrows() + rows.len(), d));
    out.slice_mut(ndarray::s![..x.nrows(), ..]).assign(&x);
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            out[[x.nrows() + r, c]] = v;
        }
    }
    let mut y_out = y.to_vec();
    y_out.extend(labels);
    Ok((out, y_out))
}

/// Rounds interpolated index features back to valid token indices.
pub fn round_to_token_space(x: ArrayView2<f64>, vocab_size: usize) -> Array2<usize> {
    let hi = vocab_size.saturating_sub(1) as f64;
    x.mapv(|v| v.round().clamp(0.0, hi) as usize)
}
