use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::error::{read_to_string, Error, Result};

pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

pub const DEFAULT_MAX_LEN: usize = 50;
pub const DEFAULT_MAX_SIZE: usize = 20_000;

/// Token ↔ index bijection with padding at 0 and unknown at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_index: HashMap<String, usize>,
    index_to_token: Vec<String>,
}

impl Vocabulary {
    /// Counts tokens across `corpus` and keeps the most frequent ones
    /// (ties broken lexicographically) up to `max_size` entries in total.
    pub fn build<D, T>(corpus: &[D], max_size: usize, min_freq: usize) -> Result<Self>
    where
        D: AsRef<[T]>,
        T: AsRef<str>,
    {
        if max_size < 2 {
            return Err(Error::Config(format!(
                "vocabulary max_size must be >= 2, got {max_size}"
            )));
        }
        if min_freq < 1 {
            return Err(Error::Config("vocabulary min_freq must be >= 1".into()));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for doc in corpus {
            for tok in doc.as_ref() {
                let tok = tok.as_ref();
                if tok == PAD_TOKEN || tok == UNK_TOKEN {
                    continue;
                }
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_freq).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size - 2);
        Ok(Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string())))
    }

    /// Sentinels followed by `tokens` in order; duplicates after the first are ignored.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut v = Self {
            token_to_index: HashMap::new(),
            index_to_token: Vec::new(),
        };
        for t in [PAD_TOKEN.to_string(), UNK_TOKEN.to_string()].into_iter().chain(tokens) {
            if !v.token_to_index.contains_key(&t) {
                v.token_to_index.insert(t.clone(), v.index_to_token.len());
                v.index_to_token.push(t);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.index_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_token.is_empty()
    }

    pub fn index(&self, token: &str) -> usize {
        self.token_to_index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.index_to_token.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.index_to_token
    }

    /// Maps tokens to indices, truncating or post-padding to `max_len`.
    pub fn encode<T: AsRef<str>>(&self, tokens: &[T], max_len: usize) -> Vec<usize> {
        let mut out: Vec<usize> = tokens.iter().take(max_len).map(|t| self.index(t.as_ref())).collect();
        out.resize(max_len, PAD_INDEX);
        out
    }

    pub fn decode(&self, indices: &[usize]) -> Vec<&str> {
        indices.iter().map(|&i| self.token(i).unwrap_or(UNK_TOKEN)).collect()
    }

    /// SHA-256 over the newline-joined token list, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.index_to_token {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// One token per line, in index order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.index_to_token {
            s.push_str(t);
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, source_name: &str) -> Result<Self> {
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::parse(
                source_name,
                1,
                "vocabulary must start with <pad> and <unk>",
            ));
        }
        let v = Self::from_tokens(tokens.iter().skip(2).cloned());
        if v.len() != tokens.len() {
            return Err(Error::Data(format!("{source_name}: duplicate vocabulary entries")));
        }
        Ok(v)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&read_to_string(path)?, &path.display().to_string())
    }
}

/// Padded index sequences with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBatch {
    pub sequences: Array2<usize>,
    pub labels: Vec<usize>,
}

impl EncodedBatch {
    pub fn encode<D: AsRef<[String]>>(
        docs: &[D],
        labels: &[usize],
        vocab: &Vocabulary,
        max_len: usize,
    ) -> Result<Self> {
        if docs.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} documents but {} labels",
                docs.len(),
                labels.len()
            )));
        }
        if max_len < 1 {
            return Err(Error::Config("max_len must be >= 1".into()));
        }
        let mut sequences = Array2::zeros((docs.len(), max_len));
        for (i, d) in docs.iter().enumerate() {
            for (j, ix) in vocab.encode(d.as_ref(), max_len).into_iter().enumerate() {
                sequences[[i, j]] = ix;
            }
        }
        Ok(Self {
            sequences,
            labels: labels.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.sequences.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            sequences: self.sequences.select(ndarray::Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn build_examples() {
        let v = Vocabulary::build(&[toks(&["a", "b", "a"])], 10, 1).unwrap();
        assert_eq!(v.tokens(), &toks(&[PAD_TOKEN, UNK_TOKEN, "a", "b"]));
        let v = Vocabulary::build::<Vec<String>, String>(&[], 10, 1).unwrap();
        assert_eq!(v.len(), 2);
        let v = Vocabulary::build(&[toks(&["y", "x"])], 3, 1).unwrap();
        assert_eq!(v.tokens(), &toks(&[PAD_TOKEN, UNK_TOKEN, "x"]));
    }

    #[test]
    fn min_freq_filters() {
        let v = Vocabulary::build(&[toks(&["a", "b", "a"])], 10, 2).unwrap();
        assert_eq!(v.tokens(), &toks(&[PAD_TOKEN, UNK_TOKEN, "a"]));
    }

    #[test]
    fn invalid_sizes() {
        assert!(Vocabulary::build::<Vec<String>, String>(&[], 1, 1).is_err());
        assert!(Vocabulary::build::<Vec<String>, String>(&[], 5, 0).is_err());
    }

    #[test]
    fn sentinel_tokens_in_corpus_are_ignored() {
        let v = Vocabulary::build(&[toks(&["<pad>", "<unk>", "z"])], 10, 1).unwrap();
        assert_eq!(v.tokens(), &toks(&[PAD_TOKEN, UNK_TOKEN, "z"]));
    }

    #[test]
    fn encode_examples() {
        let v = Vocabulary::from_tokens(toks(&["a", "b"]));
        assert_eq!(v.encode(&["a", "b"], 4), vec![2, 3, 0, 0]);
        assert_eq!(v.encode::<&str>(&[], 3), vec![0, 0, 0]);
        let v = Vocabulary::from_tokens(toks(&["a"]));
        assert_eq!(v.encode(&["a", "z"], 2), vec![2, 1]);
        assert_eq!(v.encode(&["a", "a", "a"], 2), vec![2, 2]);
    }

    #[test]
    fn text_round_trip_and_hash() {
        let v = Vocabulary::from_tokens(toks(&["x", "y"]));
        let back = Vocabulary::from_text(&v.to_text(), "v").unwrap();
        assert_eq!(v, back);
        assert_eq!(v.hash(), back.hash());
        assert_ne!(v.hash(), Vocabulary::from_tokens(toks(&["y", "x"])).hash());
        assert!(Vocabulary::from_text("a\nb\n", "v").is_err());
    }
}
