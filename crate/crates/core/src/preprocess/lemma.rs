use std::collections::HashMap;
use std::path::Path;

use super::contractions::parse_tab_pairs;
use crate::error::{read_to_string, Error, Result};

/// Inflected form → lemma, by dictionary lookup only.
#[derive(Debug, Clone, Default)]
pub struct LemmaLexicon {
    entries: HashMap<String, String>,
}

const SHIPPED: &str = include_str!("../../resources/lemmas.tsv");

impl LemmaLexicon {
    /// Rejects lexicons whose lemmas are not fixed points.
    pub fn new(entries: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut map: HashMap<String, String> = HashMap::new();
        for (k, v) in entries {
            map.entry(k.to_lowercase()).or_insert(v.to_lowercase());
        }
        for (k, v) in &map {
            if let Some(again) = map.get(v) {
                if again != v {
                    return Err(Error::Config(format!(
                        "lemma `{v}` of `{k}` is not a fixed point (maps to `{again}`)"
                    )));
                }
            }
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
        Self::parse(SHIPPED, "lemmas.tsv").expect("shipped lemma lexicon is valid")
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.entries.get(token).map(String::as_str)
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

pub fn lemmatize(token: &str, lexicon: &LemmaLexicon) -> String {
    lexicon.get(token).unwrap_or(token).to_string()
}
