//! Feed-forward building blocks with explicit backward passes.
//! Sequence tensors are laid out `[batch, time, channels]`.

use ndarray::{s, Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};

/// Clamp applied to the true-class probability before taking its log.
pub const PROB_FLOOR: f64 = 1e-12;

pub(crate) struct ConvCache {
    cols: Array2<f64>,
    pre: Array2<f64>,
    batch: usize,
    steps_in: usize,
    channels: usize,
    width: usize,
}

fn im2col(input: ArrayView3<f64>, width: usize) -> Array2<f64> {
    let (b, t, c) = input.dim();
    let t_out = t + 1 - width;
    let mut cols = Array2::zeros((b * t_out, width * c));
    for bi in 0..b {
        for ti in 0..t_out {
            let mut row = cols.row_mut(bi * t_out + ti);
            for w in 0..width {
                row.slice_mut(s![w * c..(w + 1) * c])
                    .assign(&input.slice(s![bi, ti + w, ..]));
            }
        }
    }
    cols
}

/// Kernel stored `[width, channels, filters]`; flattened to `[width·channels, filters]`.
fn flat_kernel(kernel: ArrayView3<f64>) -> ArrayView2<f64> {
    let (w, c, k) = kernel.dim();
    kernel.into_shape_with_order((w * c, k)).expect("kernel is contiguous")
}

pub(crate) fn conv1d_forward(
    input: ArrayView3<f64>,
    kernel: ArrayView3<f64>,
    bias: ArrayView1<f64>,
) -> Result<(Array3<f64>, ConvCache)> {
    let (b, t, c) = input.dim();
    let (width, kc, k) = kernel.dim();
    if kc != c || bias.len() != k {
        return Err(Error::Shape(format!(
            "kernel [{width}, {kc}, {k}] / bias [{}] do not match {c} input channels",
            bias.len()
        )));
    }
    if t < width {
        return Err(Error::Shape(format!(
            "sequence length {t} shorter than kernel width {width}"
        )));
    }
    let t_out = t + 1 - width;
    let cols = im2col(input, width);
    let mut pre = cols.dot(&flat_kernel(kernel));
    pre += &bias;
    let out = pre
        .mapv(|v| v.max(0.0))
        .into_shape_with_order((b, t_out, k))
        .expect("contiguous");
    Ok((
        out,
        ConvCache {
            cols,
            pre,
            batch: b,
            steps_in: t,
            channels: c,
            width,
        },
    ))
}

/// Returns `(d_input, d_kernel [w, C, K], d_bias)`.
pub(crate) fn conv1d_backward(
    cache: &ConvCache,
    kernel: ArrayView3<f64>,
    d_out: ArrayView3<f64>,
) -> (Array3<f64>, Array3<f64>, Array1<f64>) {
    let (b, t_out, k) = d_out.dim();
    let mut d_pre = d_out
        .to_owned()
        .into_shape_with_order((b * t_out, k))
        .expect("contiguous");
    Zip::from(&mut d_pre).and(&cache.pre).for_each(|d, &p| {
        if p <= 0.0 {
            *d = 0.0;
        }
    });
    let d_kernel = cache
        .cols
        .t()
        .dot(&d_pre)
        .into_shape_with_order(kernel.dim())
        .expect("contiguous");
    let d_bias = d_pre.sum_axis(Axis(0));
    let d_cols = d_pre.dot(&flat_kernel(kernel).t());
    let (c, width) = (cache.channels, cache.width);
    let mut d_input = Array3::zeros((cache.batch, cache.steps_in, c));
    for bi in 0..b {
        for ti in 0..t_out {
            let row = d_cols.row(bi * t_out + ti);
            for w in 0..width {
                let mut dst = d_input.slice_mut(s![bi, ti + w, ..]);
                dst += &row.slice(s![w * c..(w + 1) * c]);
            }
        }
    }
    (d_input, d_kernel, d_bias)
}

/// Valid cross-correlation along time followed by ReLU.
/// `kernel` is `[width, channels, filters]`.
pub fn conv1d(input: ArrayView3<f64>, kernel: ArrayView3<f64>, bias: ArrayView1<f64>) -> Result<Array3<f64>> {
    conv1d_forward(input, kernel, bias).map(|(out, _)| out)
}

/// Gradients of `sum(d_out ⊙ conv1d(input))` with respect to input, kernel and bias.
pub fn conv1d_grad(
    input: ArrayView3<f64>,
    kernel: ArrayView3<f64>,
    bias: ArrayView1<f64>,
    d_out: ArrayView3<f64>,
) -> Result<(Array3<f64>, Array3<f64>, Array1<f64>)> {
    let (_, cache) = conv1d_forward(input, kernel, bias)?;
    Ok(conv1d_backward(&cache, kernel, d_out))
}

pub(crate) struct PoolCache {
    argmax: Array3<usize>,
    steps_in: usize,
}

pub(crate) fn maxpool_forward(input: ArrayView3<f64>, pool: usize) -> Result<(Array3<f64>, PoolCache)> {
    let (b, t, k) = input.dim();
    if pool == 0 || t < pool {
        return Err(Error::Shape(format!(
            "sequence length {t} shorter than pool size {pool}"
        )));
    }
    let t_out = t / pool;
    let mut out = Array3::zeros((b, t_out, k));
    let mut argmax = Array3::zeros((b, t_out, k));
    for bi in 0..b {
        for to in 0..t_out {
            for ki in 0..k {
                let mut best = to * pool;
                for ti in to * pool + 1..(to + 1) * pool {
                    if input[[bi, ti, ki]] > input[[bi, best, ki]] {
                        best = ti;
                    }
                }
                out[[bi, to, ki]] = input[[bi, best, ki]];
                argmax[[bi, to, ki]] = best;
            }
        }
    }
    Ok((out, PoolCache { argmax, steps_in: t }))
}

pub(crate) fn maxpool_backward(cache: &PoolCache, d_out: ArrayView3<f64>) -> Array3<f64> {
    let (b, t_out, k) = d_out.dim();
    let mut d_in = Array3::zeros((b, cache.steps_in, k));
    for bi in 0..b {
        for to in 0..t_out {
            for ki in 0..k {
                d_in[[bi, cache.argmax[[bi, to, ki]], ki]] += d_out[[bi, to, ki]];
            }
        }
    }
    d_in
}

/// Non-overlapping max pooling along time; trailing remainder steps are dropped.
pub fn maxpool1d(input: ArrayView3<f64>, pool: usize) -> Result<Array3<f64>> {
    maxpool_forward(input, pool).map(|(out, _)| out)
}

/// Routes each window's gradient to its first maximal position.
pub fn maxpool1d_grad(input: ArrayView3<f64>, pool: usize, d_out: ArrayView3<f64>) -> Result<Array3<f64>> {
    let (_, cache) = maxpool_forward(input, pool)?;
    Ok(maxpool_backward(&cache, d_out))
}

/// Inverted-dropout keep mask: entries are 0 or `1/(1-rate)`.
pub(crate) fn dropout_mask<R: Rng + ?Sized>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Array2<f64> {
    let scale = 1.0 / (1.0 - rate);
    Array2::from_shape_simple_fn((rows, cols), || if rng.gen::<f64>() < rate { 0.0 } else { scale })
}

pub(crate) fn apply_channel_mask(input: &mut Array3<f64>, mask: &Array2<f64>) {
    for (mut seq, m) in input.outer_iter_mut().zip(mask.outer_iter()) {
        for mut step in seq.outer_iter_mut() {
            step *= &m;
        }
    }
}

/// Drops whole channels: one Bernoulli draw per (example, channel), shared
/// across every time step. Identity at inference or when `rate` is 0.
pub fn spatial_dropout<R: Rng + ?Sized>(input: ArrayView3<f64>, rate: f64, training: bool, rng: &mut R) -> Array3<f64> {
    let mut out = input.to_owned();
    if training && rate > 0.0 {
        let (b, _, k) = input.dim();
        let mask = dropout_mask(b, k, rate, rng);
        apply_channel_mask(&mut out, &mask);
    }
    out
}

/// `ReLU(x·W + b)` for a batch of row vectors. `W` is `[in, out]`.
pub(crate) fn dense_relu(x: ArrayView2<f64>, w: ArrayView2<f64>, b: ArrayView1<f64>) -> (Array2<f64>, Array2<f64>) {
    let mut pre = x.dot(&w);
    pre += &b;
    let out = pre.mapv(|v| v.max(0.0));
    (out, pre)
}

pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut e = logits.mapv(|v| (v - max).exp());
    let sum = e.sum();
    e /= sum;
    e
}

pub(crate) fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.outer_iter_mut() {
        let p = softmax(row.view());
        row.assign(&p);
    }
    out
}

/// Classifier head on one feature vector: ReLU dense layer, linear output,
/// softmax. `wd` is `[in, hidden]`, `wo` is `[hidden, classes]`.
pub fn dense_softmax(
    input: ArrayView1<f64>,
    wd: ArrayView2<f64>,
    bd: ArrayView1<f64>,
    wo: ArrayView2<f64>,
    bo: ArrayView1<f64>,
) -> Array1<f64> {
    let hidden = (input.dot(&wd) + bd).mapv(|v| v.max(0.0));
    let logits = hidden.dot(&wo) + bo;
    softmax(logits.view())
}

/// Mean over the batch of `w[y] · −ln p[y]`, with `p[y]` floored at 1e-12.
pub fn weighted_cross_entropy(probs: ArrayView2<f64>, labels: &[usize], weights: &[f64]) -> f64 {
    let n = labels.len().max(1) as f64;
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| weights[y] * -probs[[i, y]].max(PROB_FLOOR).ln())
        .sum::<f64>()
        / n
}

/// Gradient of [`weighted_cross_entropy`] with respect to the logits feeding the softmax.
pub(crate) fn weighted_cross_entropy_grad(probs: &Array2<f64>, labels: &[usize], weights: &[f64]) -> Array2<f64> {
    let n = labels.len().max(1) as f64;
    let mut d = probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        d[[i, y]] -= 1.0;
        let scale = weights[y] / n;
        d.row_mut(i).mapv_inplace(|v| v * scale);
    }
    d
}
