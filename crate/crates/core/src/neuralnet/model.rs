use ndarray::{concatenate, s, Array2, Array3, ArrayView2, ArrayView3, Axis, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{
    apply_channel_mask, conv1d_backward, conv1d_forward, dense_relu, dropout_mask, maxpool_backward, maxpool_forward,
    softmax_rows, weighted_cross_entropy, weighted_cross_entropy_grad, ConvCache, PoolCache,
};
use super::params::{zeros, Parameters};
use super::recurrent::{backward_direction, run_direction, CellWeights, DirectionCache};
use super::spec::ModelSpec;
use super::variant::RecurrentKind;
use crate::error::{Error, Result};
use crate::representation::{EmbeddingMatrix, PAD_INDEX};

/// Half-width of the uniform init for recurrent matrices.
const RECURRENT_INIT_SCALE: f64 = 0.05;
const LSTM_FORGET_BIAS: f64 = 1.0;

/// Dropout behaviour for a forward pass. Training masks are drawn from a
/// generator seeded with `seed`, so a pass is reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eval,
    Train { seed: u64 },
}

#[derive(Debug, Clone, Copy)]
struct CellIdx {
    w: usize,
    b: usize,
    wc: Option<usize>,
    bc: Option<usize>,
}

#[derive(Debug, Clone)]
enum Stage {
    Conv {
        kernel: usize,
        bias: usize,
    },
    MaxPool,
    GlobalMaxPool,
    Recurrent {
        kind: RecurrentKind,
        forward: CellIdx,
        backward: Option<CellIdx>,
    },
    SpatialDropout,
}

enum StageCache {
    Conv(ConvCache),
    Pool(PoolCache),
    Recurrent {
        forward: DirectionCache,
        backward: Option<DirectionCache>,
        hidden: usize,
    },
    Dropout(Option<Array2<f64>>),
}

struct ForwardCache {
    ids: Array2<usize>,
    stages: Vec<StageCache>,
    last_steps: usize,
    head_in: Array2<f64>,
    dense_pre: Array2<f64>,
    dense_mask: Option<Array2<f64>>,
    hidden: Array2<f64>,
    probs: Array2<f64>,
}

/// A classifier assembled from a [`ModelSpec`].
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    params: Parameters,
    embedding: usize,
    stages: Vec<Stage>,
    dense: (usize, usize),
    output: (usize, usize),
}

fn glorot<R: Rng>(rng: &mut R, shape: &[usize], fan_in: usize, fan_out: usize) -> ndarray::ArrayD<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    ndarray::ArrayD::from_shape_simple_fn(IxDyn(shape), || rng.gen_range(-limit..=limit))
}

fn uniform<R: Rng>(rng: &mut R, shape: &[usize], scale: f64) -> ndarray::ArrayD<f64> {
    ndarray::ArrayD::from_shape_simple_fn(IxDyn(shape), || rng.gen_range(-scale..=scale))
}

impl Model {
    /// Builds the layer stack for `spec.variant` with seeded initial weights.
    pub fn new(spec: ModelSpec, embeddings: &EmbeddingMatrix) -> Result<Self> {
        spec.validate()?;
        if embeddings.dim() != spec.embedding_dim {
            return Err(Error::Config(format!(
                "embedding matrix has dimension {}, spec expects {}",
                embeddings.dim(),
                spec.embedding_dim
            )));
        }
        if embeddings.vocab_size() < 2 {
            return Err(Error::Config(
                "embedding matrix needs at least the two sentinel rows".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut params = Parameters::new();
        let embedding = params.push(
            "embedding",
            embeddings.values.clone().into_dyn(),
            spec.embedding_trainable,
        );
        let mut stages = Vec::new();
        let mut channels = spec.embedding_dim;
        let v = spec.variant;

        let conv_block = |params: &mut Parameters,
                          stages: &mut Vec<Stage>,
                          channels: &mut usize,
                          tag: &str,
                          rng: &mut ChaCha8Rng| {
            let (w, k) = (spec.kernel_size, spec.conv_filters);
            let kernel = params.push(
                format!("{tag}.kernel"),
                glorot(rng, &[w, *channels, k], w * *channels, w * k),
                true,
            );
            let bias = params.push(format!("{tag}.bias"), zeros(&[k]), true);
            stages.push(Stage::Conv { kernel, bias });
            stages.push(Stage::MaxPool);
            *channels = k;
        };

        if v.cnn_first() {
            conv_block(&mut params, &mut stages, &mut channels, "conv_in", &mut rng);
        }
        match v.recurrent() {
            Some(block) => {
                let h = spec.rnn_units;
                let mut make_cell = |params: &mut Parameters, dir: &str| -> CellIdx {
                    let rows = channels + h;
                    let gates = block.kind.gate_blocks() * h;
                    let w = params.push(
                        format!("rnn.{dir}.w"),
                        uniform(&mut rng, &[rows, gates], RECURRENT_INIT_SCALE),
                        true,
                    );
                    let mut bias = zeros(&[gates]);
                    if block.kind == RecurrentKind::Lstm {
                        bias.slice_mut(s![h..2 * h]).fill(LSTM_FORGET_BIAS);
                    }
                    let b = params.push(format!("rnn.{dir}.b"), bias, true);
                    let (wc, bc) = match block.kind {
                        RecurrentKind::Lstm => (None, None),
                        RecurrentKind::Gru => (
                            Some(params.push(
                                format!("rnn.{dir}.wc"),
                                uniform(&mut rng, &[rows, h], RECURRENT_INIT_SCALE),
                                true,
                            )),
                            Some(params.push(format!("rnn.{dir}.bc"), zeros(&[h]), true)),
                        ),
                    };
                    CellIdx { w, b, wc, bc }
                };
                let forward = make_cell(&mut params, "fwd");
                let backward = block.bidirectional.then(|| make_cell(&mut params, "bwd"));
                stages.push(Stage::Recurrent {
                    kind: block.kind,
                    forward,
                    backward,
                });
                channels = if block.bidirectional { 2 * h } else { h };
            }
            None => stages.push(Stage::GlobalMaxPool),
        }
        if v.cnn_after() {
            conv_block(&mut params, &mut stages, &mut channels, "conv_out", &mut rng);
        }
        stages.push(Stage::SpatialDropout);

        let u = spec.dense_units;
        let dw = params.push("dense.w", glorot(&mut rng, &[channels, u], channels, u), true);
        let db = params.push("dense.b", zeros(&[u]), true);
        let c = spec.num_classes;
        let ow = params.push("output.w", glorot(&mut rng, &[u, c], u, c), true);
        let ob = params.push("output.b", zeros(&[c]), true);

        Ok(Self {
            spec,
            params,
            embedding,
            stages,
            dense: (dw, db),
            output: (ow, ob),
        })
    }

    /// Rebuilds a model around stored parameters, checking names and shapes.
    pub fn from_parameters(spec: ModelSpec, params: Parameters) -> Result<Self> {
        let emb = params
            .by_name("embedding")
            .ok_or_else(|| Error::Data("parameters lack an embedding tensor".into()))?;
        let shape = emb.value.shape();
        if shape.len() != 2 {
            return Err(Error::Data("embedding tensor must be 2-d".into()));
        }
        let placeholder = EmbeddingMatrix {
            values: Array2::zeros((shape[0], shape[1])),
            coverage: 0.0,
        };
        let mut model = Self::new(spec, &placeholder)?;
        if model.params.shapes() != params.shapes() {
            return Err(Error::Data(
                "stored parameter names or shapes do not match the model spec".into(),
            ));
        }
        model.params = params;
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn parameters(&self) -> &Parameters {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut Parameters {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.count()
    }

    pub fn vocab_size(&self) -> usize {
        self.params.get(self.embedding).value.shape()[0]
    }

    fn cell(&self, kind: RecurrentKind, idx: CellIdx) -> CellWeights<'_> {
        CellWeights {
            kind,
            w: self.params.mat(idx.w),
            b: self.params.vec(idx.b),
            wc: idx.wc.map(|i| self.params.mat(i)),
            bc: idx.bc.map(|i| self.params.vec(i)),
        }
    }

    fn kernel(&self, idx: usize) -> ArrayView3<'_, f64> {
        self.params
            .get(idx)
            .value
            .view()
            .into_dimensionality()
            .expect("kernel is 3-d")
    }

    fn embed(&self, ids: ArrayView2<usize>) -> Result<Array3<f64>> {
        let table = self.params.mat(self.embedding);
        let (b, t) = ids.dim();
        let mut out = Array3::zeros((b, t, table.ncols()));
        for ((bi, ti), &id) in ids.indexed_iter() {
            if id >= table.nrows() {
                return Err(Error::Data(format!(
                    "token index {id} outside vocabulary of {}",
                    table.nrows()
                )));
            }
            if id != PAD_INDEX {
                out.slice_mut(s![bi, ti, ..]).assign(&table.row(id));
            }
        }
        Ok(out)
    }

    fn forward(&self, ids: ArrayView2<usize>, mode: Mode) -> Result<ForwardCache> {
        let (batch, steps) = ids.dim();
        if steps < self.spec.min_sequence_len() {
            return Err(Error::Shape(format!(
                "sequence length {steps} below the {} steps {} needs",
                self.spec.min_sequence_len(),
                self.spec.variant
            )));
        }
        let (training, mut rng) = match mode {
            Mode::Eval => (false, ChaCha8Rng::seed_from_u64(0)),
            Mode::Train { seed } => (true, ChaCha8Rng::seed_from_u64(seed)),
        };
        let mut x = self.embed(ids)?;
        let mut caches = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            match stage {
                Stage::Conv { kernel, bias } => {
                    let (out, cache) = conv1d_forward(x.view(), self.kernel(*kernel), self.params.vec(*bias))?;
                    x = out;
                    caches.push(StageCache::Conv(cache));
                }
                Stage::MaxPool => {
                    let (out, cache) = maxpool_forward(x.view(), self.spec.pool_size)?;
                    x = out;
                    caches.push(StageCache::Pool(cache));
                }
                Stage::GlobalMaxPool => {
                    let t = x.dim().1;
                    let (out, cache) = maxpool_forward(x.view(), t)?;
                    x = out;
                    caches.push(StageCache::Pool(cache));
                }
                Stage::Recurrent {
                    kind,
                    forward,
                    backward,
                } => {
                    let rate = self.spec.internal_rnn_dropout_rate;
                    let channels = x.dim().2;
                    let mut mask = || (training && rate > 0.0).then(|| dropout_mask(batch, channels, rate, &mut rng));
                    let fmask = mask();
                    let bmask = backward.map(|_| mask()).flatten();
                    let fcell = self.cell(*kind, *forward);
                    let (fout, fcache) = run_direction(&fcell, x.view(), false, fmask)?;
                    let (out, bcache) = match backward {
                        Some(bidx) => {
                            let bcell = self.cell(*kind, *bidx);
                            let (bout, bcache) = run_direction(&bcell, x.view(), true, bmask)?;
                            (concatenate![Axis(2), fout, bout], Some(bcache))
                        }
                        None => (fout, None),
                    };
                    x = out;
                    caches.push(StageCache::Recurrent {
                        forward: fcache,
                        backward: bcache,
                        hidden: self.spec.rnn_units,
                    });
                }
                Stage::SpatialDropout => {
                    let rate = self.spec.spatial_dropout_rate;
                    let mask = (training && rate > 0.0).then(|| dropout_mask(batch, x.dim().2, rate, &mut rng));
                    if let Some(m) = &mask {
                        apply_channel_mask(&mut x, m);
                    }
                    caches.push(StageCache::Dropout(mask));
                }
            }
        }
        let last_steps = x.dim().1;
        let head_in = x.index_axis(Axis(1), last_steps - 1).to_owned();
        let (mut hidden, dense_pre) = dense_relu(
            head_in.view(),
            self.params.mat(self.dense.0),
            self.params.vec(self.dense.1),
        );
        let rate = self.spec.spatial_dropout_rate;
        let dense_mask = (self.spec.dense_dropout && training && rate > 0.0)
            .then(|| dropout_mask(batch, hidden.ncols(), rate, &mut rng));
        if let Some(m) = &dense_mask {
            hidden *= m;
        }
        let logits = hidden.dot(&self.params.mat(self.output.0)) + self.params.vec(self.output.1);
        let probs = softmax_rows(&logits);
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("non-finite class probabilities".into()));
        }
        Ok(ForwardCache {
            ids: ids.to_owned(),
            stages: caches,
            last_steps,
            head_in,
            dense_pre,
            dense_mask,
            hidden,
            probs,
        })
    }

    /// Class probabilities, `[batch, num_classes]`.
    pub fn predict_proba(&self, ids: ArrayView2<usize>, mode: Mode) -> Result<Array2<f64>> {
        Ok(self.forward(ids, mode)?.probs)
    }

    /// Arg-max class per row (first index on ties), evaluated in chunks.
    pub fn predict(&self, ids: ArrayView2<usize>) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.nrows());
        for chunk in ids.axis_chunks_iter(Axis(0), 256) {
            let probs = self.predict_proba(chunk, Mode::Eval)?;
            for row in probs.outer_iter() {
                let mut best = 0;
                for (k, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = k;
                    }
                }
                out.push(best);
            }
        }
        Ok(out)
    }

    pub fn loss(&self, ids: ArrayView2<usize>, labels: &[usize], weights: &[f64], mode: Mode) -> Result<f64> {
        self.check_labels(ids, labels, weights)?;
        let cache = self.forward(ids, mode)?;
        Ok(weighted_cross_entropy(cache.probs.view(), labels, weights))
    }

    fn check_labels(&self, ids: ArrayView2<usize>, labels: &[usize], weights: &[f64]) -> Result<()> {
        if ids.nrows() != labels.len() || ids.nrows() == 0 {
            return Err(Error::Shape(format!(
                "{} sequences but {} labels",
                ids.nrows(),
                labels.len()
            )));
        }
        if weights.len() != self.spec.num_classes {
            return Err(Error::Shape(format!(
                "{} class weights for {} classes",
                weights.len(),
                self.spec.num_classes
            )));
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= self.spec.num_classes) {
            return Err(Error::Data(format!("label {y} out of range")));
        }
        Ok(())
    }

    /// Loss and its gradient with respect to every parameter tensor.
    /// Frozen tensors get zero gradients.
    pub fn loss_and_gradients(
        &self,
        ids: ArrayView2<usize>,
        labels: &[usize],
        weights: &[f64],
        mode: Mode,
    ) -> Result<(f64, Parameters)> {
        self.check_labels(ids, labels, weights)?;
        let cache = self.forward(ids, mode)?;
        let loss = weighted_cross_entropy(cache.probs.view(), labels, weights);
        let mut grads = self.params.zeros_like();

        let d_logits = weighted_cross_entropy_grad(&cache.probs, labels, weights);
        let (ow, ob) = self.output;
        grads.mat_mut(ow).assign(&cache.hidden.t().dot(&d_logits));
        grads.vec_mut(ob).assign(&d_logits.sum_axis(Axis(0)));
        let mut d_hidden = d_logits.dot(&self.params.mat(ow).t());
        if let Some(m) = &cache.dense_mask {
            d_hidden *= m;
        }
        let mut d_pre = d_hidden;
        ndarray::Zip::from(&mut d_pre).and(&cache.dense_pre).for_each(|d, &p| {
            if p <= 0.0 {
                *d = 0.0;
            }
        });
        let (dw, db) = self.dense;
        grads.mat_mut(dw).assign(&cache.head_in.t().dot(&d_pre));
        grads.vec_mut(db).assign(&d_pre.sum_axis(Axis(0)));
        let d_head = d_pre.dot(&self.params.mat(dw).t());

        let batch = ids.nrows();
        let mut dx = Array3::zeros((batch, cache.last_steps, d_head.ncols()));
        dx.index_axis_mut(Axis(1), cache.last_steps - 1).assign(&d_head);

        for (stage, sc) in self.stages.iter().zip(&cache.stages).rev() {
            dx = match (stage, sc) {
                (Stage::Conv { kernel, bias }, StageCache::Conv(c)) => {
                    let (d_in, dk, dbias) = conv1d_backward(c, self.kernel(*kernel), dx.view());
                    grads.get_mut(*kernel).value.assign(&dk.into_dyn());
                    grads.vec_mut(*bias).assign(&dbias);
                    d_in
                }
                (Stage::MaxPool | Stage::GlobalMaxPool, StageCache::Pool(c)) => maxpool_backward(c, dx.view()),
                (Stage::SpatialDropout, StageCache::Dropout(mask)) => {
                    if let Some(m) = mask {
                        apply_channel_mask(&mut dx, m);
                    }
                    dx
                }
                (
                    Stage::Recurrent {
                        kind,
                        forward,
                        backward,
                    },
                    StageCache::Recurrent {
                        forward: fc,
                        backward: bc,
                        hidden,
                    },
                ) => {
                    let h = *hidden;
                    let fcell = self.cell(*kind, *forward);
                    let (mut d_in, fg) = backward_direction(&fcell, fc, dx.slice(s![.., .., ..h]));
                    store_cell_grads(&mut grads, *forward, fg);
                    if let (Some(bidx), Some(bcache)) = (backward, bc) {
                        let bcell = self.cell(*kind, *bidx);
                        let (d_in_b, bg) = backward_direction(&bcell, bcache, dx.slice(s![.., .., h..]));
                        d_in += &d_in_b;
                        store_cell_grads(&mut grads, *bidx, bg);
                    }
                    d_in
                }
                _ => unreachable!("stage and cache kinds always align"),
            };
        }

        if self.params.get(self.embedding).trainable {
            let mut g = grads.mat_mut(self.embedding);
            for ((bi, ti), &id) in cache.ids.indexed_iter() {
                if id != PAD_INDEX {
                    let mut row = g.row_mut(id);
                    row += &dx.slice(s![bi, ti, ..]);
                }
            }
        }
        Ok((loss, grads))
    }
}

fn store_cell_grads(grads: &mut Parameters, idx: CellIdx, g: super::recurrent::CellGrads) {
    grads.mat_mut(idx.w).assign(&g.w);
    grads.vec_mut(idx.b).assign(&g.b);
    if let (Some(i), Some(m)) = (idx.wc, g.wc) {
        grads.mat_mut(i).assign(&m);
    }
    if let (Some(i), Some(v)) = (idx.bc, g.bc) {
        grads.vec_mut(i).assign(&v);
    }
}
