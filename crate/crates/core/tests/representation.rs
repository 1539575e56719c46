use std::fmt::Write as _;

use olid_core::representation::{
    build_embedding_matrix, load_embeddings, EmbeddingTable, EncodedBatch, Vocabulary, PAD_INDEX, PAD_TOKEN, UNK_INDEX,
    UNK_TOKEN,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-f]{1,3}", 0..8), 1..20)
}

proptest! {
    #[test]
    fn vocabulary_is_a_contiguous_bijection(docs in corpus(), max_size in 2usize..40) {
        let v = Vocabulary::build(&docs, max_size, 1).unwrap();
        prop_assert!(v.len() <= max_size);
        prop_assert_eq!(v.token(PAD_INDEX), Some(PAD_TOKEN));
        prop_assert_eq!(v.token(UNK_INDEX), Some(UNK_TOKEN));
        for (i, t) in v.tokens().iter().enumerate() {
            prop_assert_eq!(v.get(t), Some(i));
        }
    }

    #[test]
    fn document_order_does_not_matter(docs in corpus(), seed in any::<u64>()) {
        let mut shuffled = docs.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let a = Vocabulary::build(&docs, 12, 1).unwrap();
        let b = Vocabulary::build(&shuffled, 12, 1).unwrap();
        prop_assert_eq!(a.tokens(), b.tokens());
        prop_assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn encode_decode_round_trip(docs in corpus(), max_len in 1usize..10) {
        let v = Vocabulary::build(&docs, 1000, 1).unwrap();
        for doc in docs.iter().filter(|d| d.len() <= max_len) {
            let ids = v.encode(doc, max_len);
            let back = v.decode(&ids);
            prop_assert_eq!(&back[..doc.len()], doc.as_slice());
            prop_assert!(back[doc.len()..].iter().all(|&t| t == PAD_TOKEN));
        }
    }

    #[test]
    fn encoded_batches_stay_in_range(docs in corpus(), max_len in 1usize..10) {
        let v = Vocabulary::build(&docs[..docs.len() / 2], 6, 1).unwrap();
        let batch = EncodedBatch::encode(&docs, &vec![0; docs.len()], &v, max_len).unwrap();
        prop_assert_eq!(batch.sequences.dim(), (docs.len(), max_len));
        for (row, doc) in batch.sequences.rows().into_iter().zip(&docs) {
            prop_assert!(row.iter().all(|&i| i < v.len()));
            prop_assert!(row.iter().skip(doc.len()).all(|&i| i == PAD_INDEX));
        }
    }

    #[test]
    fn padding_row_is_exactly_zero(docs in corpus(), d in 1usize..6, seed in any::<u64>()) {
        let v = Vocabulary::build(&docs, 50, 1).unwrap();
        let table: EmbeddingTable = v.tokens()[2..].iter().step_by(2).map(|t| (t.clone(), vec![0.25; d])).collect();
        let m = build_embedding_matrix(&v, &table, d, seed).unwrap();
        prop_assert_eq!(m.values.nrows(), v.len());
        prop_assert!(m.values.row(PAD_INDEX).iter().all(|x| x.to_bits() == 0));
        prop_assert!(m.values.iter().all(|x| x.is_finite()));
        prop_assert_eq!(&m, &build_embedding_matrix(&v, &table, d, seed).unwrap());
    }
}

#[test]
fn loaded_vectors_equal_their_literals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut text = String::new();
    let mut literals = Vec::new();
    for i in 0..100 {
        let vals: Vec<String> = (0..7)
            .map(|_| format!("{:.*}", rng.gen_range(1..9), rng.gen_range(-3.0..3.0)))
            .collect();
        writeln!(text, "w{i} {}", vals.join(" ")).unwrap();
        literals.push((format!("w{i}"), vals));
    }
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), &text).unwrap();
    let table = load_embeddings(file.path(), 7).unwrap();
    assert_eq!(table.len(), 100);
    for (word, vals) in literals {
        let expected: Vec<f64> = vals.iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(table[&word], expected, "{word}");
    }
}
