//! Tweet normalization: noise stripping, contraction expansion, spelling
//! correction, lemmatization and lowercasing, applied in that order.

mod contractions;
mod lemma;
mod noise;
mod spell;

pub use contractions::{expand_contractions, ContractionMap};
pub use lemma::{lemmatize, LemmaLexicon};
pub use noise::strip_noise;
pub use spell::{
    build_delete_index, correct_spelling, damerau_levenshtein, deletion_variants, SpellDictionary,
    MAX_SUPPORTED_DISTANCE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SHIPPED_DICTIONARY: &str = include_str!("../../resources/frequency_dictionary.txt");

pub const DEFAULT_MAX_EDIT_DISTANCE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub strip_noise: bool,
    pub expand_contractions: bool,
    pub correct_spelling: bool,
    pub lemmatize: bool,
    pub lowercase: bool,
    pub max_edit_distance: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            strip_noise: true,
            expand_contractions: true,
            correct_spelling: true,
            lemmatize: true,
            lowercase: true,
            max_edit_distance: DEFAULT_MAX_EDIT_DISTANCE,
        }
    }
}

/// Lookup tables the pipeline reads. Immutable once built.
#[derive(Debug, Clone)]
pub struct Resources {
    pub contractions: ContractionMap,
    pub dictionary: SpellDictionary,
    pub lemmas: LemmaLexicon,
}

impl Resources {
    /// Resources bundled with the crate, indexed at `max_edit_distance`.
    pub fn shipped(max_edit_distance: usize) -> Result<Self> {
        let words = SpellDictionary::parse_frequency_list(SHIPPED_DICTIONARY, "frequency_dictionary.txt")?;
        Ok(Self {
            contractions: ContractionMap::shipped(),
            dictionary: build_delete_index(words, max_edit_distance)?,
            lemmas: LemmaLexicon::shipped(),
        })
    }

    pub fn for_config(cfg: &PipelineConfig) -> Result<Self> {
        Self::shipped(cfg.max_edit_distance)
    }
}

/// Spelling correction skips numerals and tokens without any letter.
fn is_correctable(token: &str) -> bool {
    token.chars().any(char::is_alphabetic) && !token.chars().any(|c| c.is_ascii_digit())
}

/// Runs the enabled steps and splits the result into tokens.
pub fn preprocess(text: &str, cfg: &PipelineConfig, resources: &Resources) -> Result<Vec<String>> {
    if cfg.correct_spelling && cfg.max_edit_distance != resources.dictionary.max_edit_distance() {
        return Err(Error::Config(format!(
            "pipeline expects edit distance {}, dictionary was indexed at {}",
            cfg.max_edit_distance,
            resources.dictionary.max_edit_distance()
        )));
    }
    let mut text = if cfg.strip_noise {
        strip_noise(text)
    } else {
        text.to_string()
    };
    if cfg.expand_contractions {
        text = expand_contractions(&text, &resources.contractions);
    }
    let tokens = text
        .split_whitespace()
        .map(|tok| {
            let mut tok = tok.to_string();
            if cfg.correct_spelling && is_correctable(&tok) {
                let lower = tok.to_lowercase();
                if !resources.dictionary.contains(&lower) {
                    let fixed = correct_spelling(&lower, &resources.dictionary);
                    if fixed != lower {
                        tok = fixed;
                    }
                }
            }
            if cfg.lemmatize {
                if let Some(lemma) = resources.lemmas.get(&tok.to_lowercase()) {
                    tok = lemma.to_string();
                }
            }
            if cfg.lowercase {
                tok = tok.to_lowercase();
            }
            tok
        })
        .collect();
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res() -> Resources {
        Resources::shipped(3).unwrap()
    }

    #[test]
    fn pipeline_examples() {
        let r = res();
        let cfg = PipelineConfig::default();
        assert_eq!(preprocess("@USER don't URL", &cfg, &r).unwrap(), vec!["do", "not"]);
        assert!(preprocess("", &cfg, &r).unwrap().is_empty());
        assert_eq!(preprocess("He SAW it", &cfg, &r).unwrap(), vec!["he", "see", "it"]);
    }

    #[test]
    fn disabled_steps_pass_through() {
        let r = res();
        let cfg = PipelineConfig {
            strip_noise: false,
            expand_contractions: false,
            correct_spelling: false,
            lemmatize: false,
            lowercase: false,
            max_edit_distance: 3,
        };
        assert_eq!(preprocess("@USER Don't", &cfg, &r).unwrap(), vec!["@USER", "Don't"]);
    }

    #[test]
    fn numerals_are_not_corrected() {
        let r = res();
        let cfg = PipelineConfig::default();
        assert_eq!(preprocess("2019 !!!", &cfg, &r).unwrap(), vec!["2019", "!!!"]);
    }

    #[test]
    fn mismatched_distance_rejected() {
        let r = Resources::shipped(2).unwrap();
        assert!(preprocess("x", &PipelineConfig::default(), &r).is_err());
    }

    #[test]
    fn shipped_resources_are_closed() {
        // Every word the pipeline can emit from a table must survive a second pass.
        let r = res();
        for (_, expansion) in r.contractions.iter() {
            for w in expansion.split_whitespace() {
                assert!(r.dictionary.contains(&w.to_lowercase()), "expansion word `{w}` missing");
            }
        }
        for (form, lemma) in r.lemmas.iter() {
            assert!(r.dictionary.contains(lemma), "lemma `{lemma}` missing");
            assert!(r.dictionary.contains(form), "inflection `{form}` missing");
        }
    }
}
