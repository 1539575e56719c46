use std::collections::HashMap;
use std::path::Path;

use crate::error::{read_to_string, Error, Result};

/// Lowercase contracted form → expansion.
#[derive(Debug, Clone)]
pub struct ContractionMap {
    entries: HashMap<String, String>,
}

const SHIPPED: &str = include_str!("../../resources/contractions.tsv");

impl ContractionMap {
    pub fn new(entries: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (k, v) in entries {
            let k = k.to_lowercase();
            if !k.contains('\'') {
                return Err(Error::Config(format!("contraction key `{k}` has no apostrophe")));
            }
            if v.contains('\'') || v.trim().is_empty() {
                return Err(Error::Config(format!("invalid expansion `{v}` for `{k}`")));
            }
            map.entry(k).or_insert(v);
        }
        if map.is_empty() {
            return Err(Error::Config("contraction map is empty".into()));
        }
        Ok(Self { entries: map })
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        Self::new(parse_tab_pairs(text, source_name)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn shipped() -> Self {
        Self::parse(SHIPPED, "contractions.tsv").expect("shipped contraction map is valid")
    }

    /// Expansion for a token, matched case-insensitively. Typographic
    /// apostrophes are treated as ASCII ones.
    pub fn get(&self, token: &str) -> Option<&str> {
        let key = token.to_lowercase().replace('\u{2019}', "'");
        self.entries.get(&key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

pub fn expand_contractions(text: &str, map: &ContractionMap) -> String {
    text.split_whitespace()
        .map(|tok| map.get(tok).unwrap_or(tok))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `surface<TAB>replacement` lines; blank lines and `#` comments skipped.
pub(crate) fn parse_tab_pairs(text: &str, source_name: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((k, v)) = trimmed.split_once('\t') else {
            return Err(Error::parse(
                source_name,
                lineno + 1,
                "expected `surface<TAB>replacement`",
            ));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() || v.contains('\t') {
            return Err(Error::parse(
                source_name,
                lineno + 1,
                "expected `surface<TAB>replacement`",
            ));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_examples() {
        let m = ContractionMap::shipped();
        assert!(m.len() >= 100);
        assert_eq!(expand_contractions("don't", &m), "do not");
        assert_eq!(expand_contractions("hello world", &m), "hello world");
        assert_eq!(
            expand_contractions("I'm sure you're wrong", &m),
            "I am sure you are wrong"
        );
        assert_eq!(expand_contractions("DON\u{2019}T", &m), "do not");
    }

    #[test]
    fn shipped_invariants() {
        let m = ContractionMap::shipped();
        for (k, v) in m.iter() {
            assert!(k.contains('\''), "{k}");
            assert!(!v.contains('\''), "{v}");
            assert_eq!(k, k.to_lowercase());
        }
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(ContractionMap::new(vec![("dont".into(), "do not".into())]).is_err());
        assert!(ContractionMap::new(vec![("don't".into(), "do n't".into())]).is_err());
        assert!(ContractionMap::new(Vec::new()).is_err());
        assert!(matches!(
            ContractionMap::parse("don't do not\n", "x"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
