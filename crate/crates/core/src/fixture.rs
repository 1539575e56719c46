//! Deterministic synthetic OLID-style corpus and GloVe-format vectors, so
//! every command can be exercised without the real data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{write_tsv, TweetRecord};

pub const FIXTURE_SEED: u64 = 2019;
/// Row counts per leaf: NOT, OFF-UNT, OFF-TIN-IND, OFF-TIN-GRP, OFF-TIN-OTH.
pub const FIXTURE_COUNTS: [usize; 5] = [201, 12, 54, 24, 9];

/// The committed copy of [`fixture_tsv`].
pub const FIXTURE_TSV: &str = include_str!("../fixtures/olid_fixture.tsv");

const OPENERS: &[&str] = &["@USER", "@USER @USER", "", "", "@USER"];
const TAILS: &[&str] = &[
    "",
    "",
    "",
    "URL",
    "#MAGA",
    "#KAG",
    "https://t.co/x1y2",
    "#news",
    "!!",
    "",
];
const FILLER: &[&str] = &[
    "today", "really", "just", "now", "again", "people", "time", "maybe", "think", "know", "everyone", "always",
];

/// Label-independent phrases, so no model can score perfectly.
const AMBIGUOUS: &[&str] = &[
    "no comment",
    "whatever you say",
    "that was wild",
    "i can't believe this",
    "what is going on",
    "oh really",
];
/// Share of tweets whose core phrase comes from [`AMBIGUOUS`].
const AMBIGUOUS_RATE: f64 = 0.12;

const NOT: &[&str] = &[
    "i think the game was great",
    "what a nice day with my friend",
    "thanks for the music it is great",
    "i'm happy to vote for change",
    "we can't wait for the show",
    "love this song so much",
    "that is a good point i agree",
    "the president spoke about gun control",
    "conservatives and liberals should talk more",
    "she's doing a great job",
    "have a happy day everyone",
    "this new book is amazing",
    "you are right about the media",
    "i hate mondays but it is fine",
    "let's watch the game tonight",
    "congratulations on the win",
    "they're working hard on it",
];

const UNT: &[&str] = &[
    "damn this is crap",
    "what the hell is this crap",
    "this is damn ugly",
    "hell no this is the worst",
    "crap day damn it",
];

const IND: &[&str] = &[
    "you are a stupid idiot",
    "you're such a pathetic loser",
    "shut up you dumb moron",
    "you are a liar and a fool",
    "he is a disgusting clown",
    "she is the worst liar",
    "you're an ugly idiot",
];

const GRP: &[&str] = &[
    "liberals are pathetic liars",
    "those democrats are garbage",
    "republicans are stupid people",
    "conservatives are disgusting fools",
    "liberals are dumb clowns",
];

const OTH: &[&str] = &[
    "the media is trash",
    "this government is garbage",
    "the media is a disgusting joke",
    "gun control is stupid crap",
];

fn tweet(rng: &mut ChaCha8Rng, cores: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let opener = *OPENERS.choose(rng).expect("non-empty");
    if !opener.is_empty() {
        parts.push(opener.to_string());
    }
    let pool = if rng.gen_bool(AMBIGUOUS_RATE) { AMBIGUOUS } else { cores };
    parts.push(pool.choose(rng).expect("non-empty").to_string());
    for _ in 0..rng.gen_range(0..3) {
        parts.push(FILLER.choose(rng).expect("non-empty").to_string());
    }
    let tail = *TAILS.choose(rng).expect("non-empty");
    if !tail.is_empty() {
        parts.push(tail.to_string());
    }
    parts.join(" ")
}

/// Phrase pool and labels (A, B, C) for one leaf of the label hierarchy.
type Leaf = (&'static [&'static str], usize, Option<usize>, Option<usize>);

/// 300 records whose label counts follow [`FIXTURE_COUNTS`], in shuffled order.
pub fn fixture_records() -> Vec<TweetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let leaves: [Leaf; 5] = [
        (NOT, 0, None, None),
        (UNT, 1, Some(1), None),
        (IND, 1, Some(0), Some(0)),
        (GRP, 1, Some(0), Some(1)),
        (OTH, 1, Some(0), Some(2)),
    ];
    let mut rows = Vec::new();
    for ((cores, a, b, c), &n) in leaves.iter().zip(FIXTURE_COUNTS.iter()) {
        for _ in 0..n {
            rows.push((tweet(&mut rng, cores), *a, *b, *c));
        }
    }
    rows.shuffle(&mut rng);
    rows.into_iter()
        .enumerate()
        .map(|(i, (text, label_a, label_b, label_c))| TweetRecord {
            id: format!("{}", 10001 + i),
            text,
            label_a,
            label_b,
            label_c,
        })
        .collect()
}

pub fn fixture_tsv() -> String {
    write_tsv(&fixture_records())
}

/// GloVe text lines (`word v1 … vd`) for `words`, drawn from a seeded
/// normal-ish distribution so related runs share vectors.
pub fn synthetic_glove<'a>(words: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for w in words {
        out.push_str(w);
        for _ in 0..dim {
            let v: f64 = (0..3).map(|_| rng.gen_range(-0.5..0.5)).sum();
            out.push_str(&format!(" {v:.5}"));
        }
        out.push('\n');
    }
    out
}
