//! Symmetric-delete spelling correction.
//!
//! Every dictionary word is expanded into all strings reachable by deleting up
//! to `max_edit_distance` characters. A query is expanded the same way; any
//! dictionary word within optimal-string-alignment distance `d` of the query
//! shares at least one deletion variant with it, so candidate generation never
//! needs a full scan.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use crate::error::{read_to_string, Error, Result};

/// Largest edit distance the index accepts. Index size grows combinatorially
/// with the distance.
pub const MAX_SUPPORTED_DISTANCE: usize = 4;

/// Optimal string alignment distance (restricted Damerau-Levenshtein) over
/// Unicode scalar values.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    osa_distance(&a, &b)
}

fn osa_distance(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let width = b.len() + 1;
    // three rolling rows: i-2, i-1, i
    let mut prev2 = vec![0usize; width];
    let mut prev: Vec<usize> = (0..width).collect();
    let mut cur = vec![0usize; width];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(prev2[j - 2] + 1);
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// All strings obtained by deleting at most `max_deletes` characters from
/// `word`, including `word` itself.
pub fn deletion_variants(word: &str, max_deletes: usize) -> HashSet<String> {
    let mut out = HashSet::new();
    let chars: Vec<char> = word.chars().collect();
    out.insert(word.to_string());
    let mut frontier = vec![chars];
    for _ in 0..max_deletes {
        let mut next = Vec::new();
        for w in &frontier {
            for skip in 0..w.len() {
                let variant: Vec<char> = w
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &c)| c)
                    .collect();
                if out.insert(variant.iter().collect()) {
                    next.push(variant);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

/// Frequency dictionary plus its precomputed deletion index.
#[derive(Debug, Clone)]
pub struct SpellDictionary {
    words: HashMap<String, u64>,
    delete_index: HashMap<String, BTreeSet<String>>,
    max_edit_distance: usize,
}

/// Builds the deletion index for `words` at the given maximum edit distance.
pub fn build_delete_index<I, S>(words: I, max_edit_distance: usize) -> Result<SpellDictionary>
where
    I: IntoIterator<Item = (S, u64)>,
    S: Into<String>,
{
    if max_edit_distance > MAX_SUPPORTED_DISTANCE {
        return Err(Error::Config(format!(
            "max_edit_distance {max_edit_distance} exceeds supported maximum {MAX_SUPPORTED_DISTANCE}"
        )));
    }
    let mut freq: HashMap<String, u64> = HashMap::new();
    for (w, f) in words {
        let w: String = w.into();
        *freq.entry(w).or_insert(0) += f;
    }
    let mut delete_index: HashMap<String, BTreeSet<String>> = HashMap::new();
    for word in freq.keys() {
        for variant in deletion_variants(word, max_edit_distance) {
            delete_index.entry(variant).or_default().insert(word.clone());
        }
    }
    Ok(SpellDictionary {
        words: freq,
        delete_index,
        max_edit_distance,
    })
}

impl SpellDictionary {
    /// Parses `word<space>frequency` lines. Blank lines and `#` comments are skipped.
    pub fn parse_frequency_list(text: &str, source_name: &str) -> Result<Vec<(String, u64)>> {
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(word), Some(freq), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(source_name, lineno + 1, "expected `word frequency`"));
            };
            let freq: u64 = freq
                .parse()
                .map_err(|_| Error::parse(source_name, lineno + 1, format!("invalid frequency `{freq}`")))?;
            out.push((word.to_lowercase(), freq));
        }
        Ok(out)
    }

    pub fn from_path(path: &Path, max_edit_distance: usize) -> Result<Self> {
        let text = read_to_string(path)?;
        let entries = Self::parse_frequency_list(&text, &path.display().to_string())?;
        build_delete_index(entries, max_edit_distance)
    }

    pub fn max_edit_distance(&self) -> usize {
        self.max_edit_distance
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.words.get(word).copied()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words.iter().map(|(w, &f)| (w.as_str(), f))
    }

    /// Dictionary words that produce `variant` by deletion.
    pub fn sources_of(&self, variant: &str) -> Option<&BTreeSet<String>> {
        self.delete_index.get(variant)
    }

    pub fn index_len(&self) -> usize {
        self.delete_index.len()
    }

    /// Closest dictionary word within the configured distance, if any.
    pub fn lookup(&self, token: &str) -> Option<(&str, usize)> {
        if let Some((w, _)) = self.words.get_key_value(token) {
            return Some((w.as_str(), 0));
        }
        let query: Vec<char> = token.chars().collect();
        let mut seen: HashSet<&str> = HashSet::new();
        let mut best: Option<(usize, u64, &str)> = None;
        for variant in deletion_variants(token, self.max_edit_distance) {
            let Some(sources) = self.delete_index.get(&variant) else {
                continue;
            };
            for cand in sources {
                if !seen.insert(cand.as_str()) {
                    continue;
                }
                let cand_chars: Vec<char> = cand.chars().collect();
                if cand_chars.len().abs_diff(query.len()) > self.max_edit_distance {
                    continue;
                }
                let d = osa_distance(&query, &cand_chars);
                if d > self.max_edit_distance {
                    continue;
                }
                let f = self.words[cand];
                let better = match best {
                    None => true,
                    Some((bd, bf, bw)) => (d, std::cmp::Reverse(f), cand.as_str()) < (bd, std::cmp::Reverse(bf), bw),
                };
                if better {
                    best = Some((d, f, cand.as_str()));
                }
            }
        }
        best.map(|(d, _, w)| (w, d))
    }
}

/// Corrects a lowercase token to its nearest dictionary word; returns the
/// token unchanged when it is already a word or nothing is close enough.
pub fn correct_spelling(token: &str, dict: &SpellDictionary) -> String {
    match dict.lookup(token) {
        Some((w, _)) => w.to_string(),
        None => token.to_string(),
    }
}
