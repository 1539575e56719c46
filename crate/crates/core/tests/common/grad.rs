//! Finite-difference checks of whole-model gradients.

use ndarray::Array2;
use olid_core::neuralnet::{Mode, Model, ModelSpec, Variant};
use olid_core::representation::{EmbeddingMatrix, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-5)
}

/// Vocab 10, d=4, H=3, K=2 filters, kernel 2, pool 2, 3 classes.
pub fn toy_model(variant: Variant, seed: u64, dense_dropout: bool) -> Model {
    let vocab = Vocabulary::from_tokens((0..8).map(|i| format!("t{i}")));
    let emb = EmbeddingMatrix::random(&vocab, 4, seed).unwrap();
    let mut spec = ModelSpec::new(variant, 4, 3);
    spec.rnn_units = 3;
    spec.conv_filters = 2;
    spec.kernel_size = 2;
    spec.pool_size = 2;
    spec.dense_units = 4;
    spec.dense_dropout = dense_dropout;
    spec.seed = seed;
    let mut model = Model::new(spec, &emb).unwrap();
    // Larger weights than the default init so every path carries signal.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    for t in model.parameters_mut().iter_mut() {
        t.value.mapv_inplace(|_| rng.gen_range(-0.6..0.6));
    }
    model
}

/// Two sequences of length 6, the second ending in padding.
pub fn toy_ids() -> (Array2<usize>, [usize; 2]) {
    (
        Array2::from_shape_vec((2, 6), vec![2, 5, 3, 9, 4, 0, 7, 6, 2, 8, 0, 0]).unwrap(),
        [1, 2],
    )
}

/// Worst relative error over every parameter entry, or a description of the
/// first entry beyond tolerance.
pub fn check_model(model: &mut Model, ids: &Array2<usize>, labels: &[usize], mode: Mode) -> Result<f64, String> {
    let weights = [1.0, 2.5, 0.7];
    let (_, grads) = model.loss_and_gradients(ids.view(), labels, &weights, mode).unwrap();
    let total: f64 = grads.iter().map(|t| t.value.iter().map(|v| v.abs()).sum::<f64>()).sum();
    if total <= 1e-3 {
        return Err(format!("{}: gradient is trivially zero", model.spec().variant));
    }
    let mut worst: f64 = 0.0;
    for ti in 0..grads.len() {
        let g = grads.get(ti).value.clone();
        for (idx, &a) in g.indexed_iter() {
            let orig = model.parameters().get(ti).value[&idx];
            model.parameters_mut().get_mut(ti).value[&idx] = orig + STEP;
            let lp = model.loss(ids.view(), labels, &weights, mode).unwrap();
            model.parameters_mut().get_mut(ti).value[&idx] = orig - STEP;
            let lm = model.loss(ids.view(), labels, &weights, mode).unwrap();
            model.parameters_mut().get_mut(ti).value[&idx] = orig;
            let n = (lp - lm) / (2.0 * STEP);
            let e = rel_err(a, n);
            if e >= TOLERANCE {
                return Err(format!(
                    "{} {}[{idx:?}]: analytic {a}, numeric {n}",
                    model.spec().variant,
                    grads.get(ti).name
                ));
            }
            worst = worst.max(e);
        }
    }
    Ok(worst)
}
