mod common;

use std::sync::OnceLock;

use olid_core::preprocess::{
    build_delete_index, correct_spelling, damerau_levenshtein, preprocess, strip_noise, PipelineConfig, Resources,
};
use proptest::prelude::*;

fn resources() -> &'static Resources {
    static R: OnceLock<Resources> = OnceLock::new();
    R.get_or_init(|| Resources::shipped(3).unwrap())
}

const PIECES: &[&str] = &[
    "@USER",
    "URL",
    "#MAGA",
    "https://t.co/x1",
    "don't",
    "Can't",
    "they're",
    "I'm",
    "SAW",
    "running",
    "children",
    "went",
    "stupid",
    "idiot",
    "teh",
    "becuase",
    "realy",
    "amazing",
    "liberals",
    "2019",
    "!!",
    "you",
    "are",
    "the",
    "wrong",
    "Shut",
    "up",
    "mice",
    "better",
    "wasn't",
];

fn tweet() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![3 => prop::sample::select(PIECES).prop_map(String::from), 1 => "[a-zA-Z']{1,9}"],
        0..14,
    )
    .prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pipeline_is_idempotent(t in tweet()) {
        let cfg = PipelineConfig::default();
        let once = preprocess(&t, &cfg, resources()).unwrap();
        let twice = preprocess(&once.join(" "), &cfg, resources()).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn distance_is_a_bounded_symmetric_measure(a in "[a-d]{0,8}", b in "[a-d]{0,8}") {
        let d = damerau_levenshtein(&a, &b);
        prop_assert_eq!(d, damerau_levenshtein(&b, &a));
        prop_assert_eq!(d == 0, a == b);
        let (la, lb) = (a.chars().count(), b.chars().count());
        prop_assert!(la.abs_diff(lb) <= d && d <= la.max(lb));
        prop_assert_eq!(d, common::osa(&a, &b));
    }

    #[test]
    fn correction_is_input_or_close_word(t in "[a-z]{1,10}") {
        let dict = &resources().dictionary;
        let out = correct_spelling(&t, dict);
        prop_assert!(out == t || dict.contains(&out));
        prop_assert!(damerau_levenshtein(&t, &out) <= 3);
    }

    #[test]
    fn index_lookup_matches_scan(
        words in prop::collection::btree_map("[a-e]{1,7}", 0u64..4, 1..60),
        queries in prop::collection::vec("[a-e]{1,8}", 1..20),
        max in 0usize..4,
    ) {
        let dict: Vec<(String, u64)> = words.into_iter().collect();
        let index = build_delete_index(dict.iter().cloned(), max).unwrap();
        for q in &queries {
            prop_assert_eq!(correct_spelling(q, &index), common::scan_correct(&dict, q, max), "query {}", q);
        }
    }

    #[test]
    fn strip_noise_only_drops_noise(
        tokens in prop::collection::vec(prop_oneof![
            "[a-z0-9!?']{1,8}",
            "@[a-zA-Z_]{1,6}",
            "#[a-zA-Z]{1,6}",
            Just("URL".to_string()),
            "https?://[a-z]{1,5}\\.co/[a-z0-9]{1,4}",
        ], 0..12)
    ) {
        let text = tokens.join(" ");
        let out = strip_noise(&text);
        let kept: Vec<&str> = out.split_whitespace().collect();
        prop_assert!(kept.len() <= tokens.len());
        let clean: Vec<&str> = tokens
            .iter()
            .map(String::as_str)
            .filter(|t| !t.starts_with('@') && !t.starts_with('#') && *t != "URL" && !t.starts_with("http"))
            .collect();
        prop_assert_eq!(kept, clean);
    }
}

#[test]
fn worked_examples() {
    let cfg = PipelineConfig::default();
    let run = |t: &str| preprocess(t, &cfg, resources()).unwrap();
    assert_eq!(run("@USER don't URL"), ["do", "not"]);
    assert!(run("").is_empty());
    assert_eq!(run("He SAW it"), ["he", "see", "it"]);
}

#[test]
fn every_dictionary_word_corrects_to_itself() {
    let dict = &resources().dictionary;
    for (w, _) in dict.words() {
        assert_eq!(correct_spelling(w, dict), w);
    }
}
