use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, PAD_INDEX};
use crate::error::{Error, Result};

/// Half-width of the uniform range used for rows with no pretrained vector.
pub const RANDOM_INIT_SCALE: f64 = 0.05;

pub type EmbeddingTable = HashMap<String, Vec<f64>>;

/// Pretrained vector sets, or none (all rows randomly initialised).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmbeddingChoice {
    Twitter100,
    Twitter200,
    CommonCrawl300,
    None,
}

impl EmbeddingChoice {
    pub const ALL: [EmbeddingChoice; 4] = [
        EmbeddingChoice::Twitter100,
        EmbeddingChoice::Twitter200,
        EmbeddingChoice::CommonCrawl300,
        EmbeddingChoice::None,
    ];

    /// Vector width of the pretrained set; `None` has no fixed width.
    pub fn dimension(self) -> Option<usize> {
        match self {
            EmbeddingChoice::Twitter100 => Some(100),
            EmbeddingChoice::Twitter200 => Some(200),
            EmbeddingChoice::CommonCrawl300 => Some(300),
            EmbeddingChoice::None => None,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            EmbeddingChoice::Twitter100 => "twitter100",
            EmbeddingChoice::Twitter200 => "twitter200",
            EmbeddingChoice::CommonCrawl300 => "commoncrawl300",
            EmbeddingChoice::None => "none",
        }
    }
}

impl fmt::Display for EmbeddingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for EmbeddingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.key().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown embedding choice `{s}`")))
    }
}

/// Reads GloVe text format: `token v1 ... vd` per line, no header.
/// The first occurrence of a duplicated token wins.
pub fn parse_embeddings<R: BufRead>(reader: R, source_name: &str, expected_dim: usize) -> Result<EmbeddingTable> {
    if expected_dim == 0 {
        return Err(Error::Config("embedding dimension must be >= 1".into()));
    }
    let mut table = EmbeddingTable::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(source_name, lineno + 1, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().expect("non-empty line has a field");
        let values: Vec<&str> = fields.collect();
        if values.len() != expected_dim {
            return Err(Error::parse(
                source_name,
                lineno + 1,
                format!("expected {expected_dim} values, found {}", values.len()),
            ));
        }
        let mut vector = Vec::with_capacity(expected_dim);
        for v in values {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(source_name, lineno + 1, format!("non-numeric value `{v}`")))?;
            if !x.is_finite() {
                return Err(Error::parse(source_name, lineno + 1, format!("non-finite value `{v}`")));
            }
            vector.push(x);
        }
        table.entry(token.to_string()).or_insert(vector);
    }
    Ok(table)
}

pub fn load_embeddings(path: &Path, expected_dim: usize) -> Result<EmbeddingTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), &path.display().to_string(), expected_dim)
}

/// |V|×d matrix aligned to a vocabulary. Row 0 (padding) is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub values: Array2<f64>,
    /// Fraction of non-sentinel vocabulary rows found in the pretrained table.
    pub coverage: f64,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.values.nrows()
    }

    /// Random matrix with no pretrained rows.
    pub fn random(vocab: &Vocabulary, d: usize, seed: u64) -> Result<Self> {
        build_embedding_matrix(vocab, &EmbeddingTable::new(), d, seed)
    }
}

/// Places pretrained vectors by vocabulary index; other rows (including
/// unknown) are drawn uniformly from ±0.05 with a seeded generator.
pub fn build_embedding_matrix(
    vocab: &Vocabulary,
    table: &EmbeddingTable,
    d: usize,
    seed: u64,
) -> Result<EmbeddingMatrix> {
    if d == 0 {
        return Err(Error::Config("embedding dimension must be >= 1".into()));
    }
    if let Some((tok, v)) = table.iter().find(|(_, v)| v.len() != d) {
        return Err(Error::Config(format!(
            "embedding for `{tok}` has dimension {}, expected {d}",
            v.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((vocab.len(), d));
    let mut found = 0usize;
    for (i, tok) in vocab.tokens().iter().enumerate() {
        if i == PAD_INDEX {
            continue;
        }
        let mut row = values.row_mut(i);
        match table.get(tok).filter(|_| i >= 2) {
            Some(v) => {
                found += 1;
                row.iter_mut().zip(v).for_each(|(r, &x)| *r = x);
            }
            None => row
                .iter_mut()
                .for_each(|r| *r = rng.gen_range(-RANDOM_INIT_SCALE..=RANDOM_INIT_SCALE)),
        }
    }
    let content = vocab.len().saturating_sub(2);
    let coverage = if content == 0 {
        0.0
    } else {
        found as f64 / content as f64
    };
    Ok(EmbeddingMatrix { values, coverage })
}
