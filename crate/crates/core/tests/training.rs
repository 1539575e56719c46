use ndarray::Array2;
use olid_core::neuralnet::{train_step, AdamConfig, AdamState, Mode, Model, ModelSpec, Parameters, Variant};
use olid_core::representation::{EmbeddingMatrix, EncodedBatch, Vocabulary};
use proptest::prelude::*;

fn toy_batch() -> EncodedBatch {
    // Class is decided by which half of the vocabulary dominates the tweet.
    let rows: [[usize; 10]; 8] = [
        [2, 3, 4, 2, 5, 3, 4, 2, 3, 5],
        [3, 5, 2, 4, 4, 2, 3, 5, 2, 4],
        [4, 2, 3, 5, 2, 3, 5, 4, 4, 2],
        [5, 4, 5, 3, 2, 4, 2, 3, 5, 3],
        [8, 9, 7, 6, 9, 8, 6, 7, 9, 8],
        [6, 7, 9, 8, 6, 7, 8, 9, 6, 7],
        [9, 6, 8, 7, 7, 9, 9, 6, 8, 6],
        [7, 8, 6, 9, 8, 6, 7, 8, 7, 9],
    ];
    EncodedBatch {
        sequences: Array2::from_shape_fn((8, 10), |(r, c)| rows[r][c]),
        labels: vec![0, 0, 0, 0, 1, 1, 1, 1],
    }
}

fn toy_model(variant: Variant, seed: u64) -> Model {
    let vocab = Vocabulary::from_tokens((0..8).map(|i| format!("t{i}")));
    let emb = EmbeddingMatrix::random(&vocab, 16, seed).unwrap();
    let mut spec = ModelSpec::new(variant, 16, 2);
    spec.rnn_units = 32;
    spec.conv_filters = 32;
    spec.dense_units = 32;
    spec.seed = seed;
    Model::new(spec, &emb).unwrap()
}

fn trajectory(variant: Variant, steps: usize) -> (Vec<f64>, Model) {
    let batch = toy_batch();
    let mut model = toy_model(variant, 3);
    let mut adam = AdamState::new(model.parameters(), AdamConfig::default()).unwrap();
    let mut losses = Vec::new();
    for s in 0..steps {
        losses.push(train_step(&mut model, &batch, &[1.0, 1.0], &mut adam, s as u64).unwrap());
    }
    (losses, model)
}

#[test]
fn fifty_steps_halve_the_loss_for_every_variant() {
    let batch = toy_batch();
    for v in Variant::ALL {
        let before = toy_model(v, 3)
            .loss(batch.sequences.view(), &batch.labels, &[1.0, 1.0], Mode::Eval)
            .unwrap();
        let (_, model) = trajectory(v, 50);
        let after = model
            .loss(batch.sequences.view(), &batch.labels, &[1.0, 1.0], Mode::Eval)
            .unwrap();
        assert!(after <= 0.5 * before, "{v}: {before} -> {after}");
    }
}

#[test]
fn identical_runs_give_identical_trajectories() {
    for v in [Variant::BiLstmCnn, Variant::CnnGru] {
        let (a, ma) = trajectory(v, 10);
        let (b, mb) = trajectory(v, 10);
        assert_eq!(a, b);
        assert_eq!(ma.parameters(), mb.parameters());
    }
}

#[test]
fn non_finite_loss_aborts_the_step() {
    let batch = toy_batch();
    let mut model = toy_model(Variant::Lstm, 1);
    model.parameters_mut().iter_mut().last().unwrap().value.fill(f64::NAN);
    let mut adam = AdamState::new(model.parameters(), AdamConfig::default()).unwrap();
    let err = train_step(&mut model, &batch, &[1.0, 1.0], &mut adam, 0).unwrap_err();
    assert!(matches!(err, olid_core::Error::Numeric(_)), "{err}");
}

fn params_of(values: &[f64]) -> Parameters {
    let vocab = Vocabulary::from_tokens(std::iter::empty());
    let emb = EmbeddingMatrix::random(&vocab, values.len(), 0).unwrap();
    let mut p = Model::new(ModelSpec::new(Variant::Cnn, values.len(), 2), &emb)
        .unwrap()
        .parameters()
        .clone();
    for t in p.iter_mut() {
        t.value.fill(0.0);
    }
    p.get_mut(0).value.row_mut_fill(values);
    p
}

trait FillRow {
    fn row_mut_fill(&mut self, values: &[f64]);
}

impl FillRow for ndarray::ArrayD<f64> {
    fn row_mut_fill(&mut self, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            self[[1, i]] = *v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn second_moment_stays_nonnegative(grads in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 3), 1..8)) {
        let mut p = params_of(&[0.0; 3]);
        let mut adam = AdamState::new(&p, AdamConfig::default()).unwrap();
        for g in &grads {
            adam.step(&mut p, &params_of(g)).unwrap();
            prop_assert!(adam.v.iter().all(|t| t.value.iter().all(|&v| v >= 0.0)));
        }
        prop_assert_eq!(adam.t, grads.len() as u64);
    }

    #[test]
    fn zero_betas_reduce_to_sign_sgd(g in proptest::collection::vec(-10.0f64..10.0, 3), start in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let cfg = AdamConfig { learning_rate: 0.01, beta1: 0.0, beta2: 0.0, epsilon: 1e-8 };
        let mut p = params_of(&start);
        let mut adam = AdamState::new(&p, cfg).unwrap();
        adam.step(&mut p, &params_of(&g)).unwrap();
        for i in 0..3 {
            let expected = start[i] - 0.01 * g[i] / (g[i].abs() + 1e-8);
            prop_assert!((p.get(0).value[[1, i]] - expected).abs() < 1e-12);
        }
    }
}
