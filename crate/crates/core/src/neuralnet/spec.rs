use serde::{Deserialize, Serialize};

use super::variant::{LayerKind, Variant};
use crate::error::{Error, Result};

/// Architecture and regularisation settings for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub embedding_dim: usize,
    pub rnn_units: usize,
    pub conv_filters: usize,
    pub kernel_size: usize,
    pub pool_size: usize,
    pub dense_units: usize,
    pub num_classes: usize,
    pub spatial_dropout_rate: f64,
    pub internal_rnn_dropout_rate: f64,
    /// Also drop units after the dense layer, at `spatial_dropout_rate`.
    pub dense_dropout: bool,
    pub embedding_trainable: bool,
    pub seed: u64,
}

impl ModelSpec {
    /// Defaults used throughout the experiments.
    pub fn new(variant: Variant, embedding_dim: usize, num_classes: usize) -> Self {
        Self {
            variant,
            embedding_dim,
            rnn_units: 100,
            conv_filters: 64,
            kernel_size: 3,
            pool_size: 2,
            dense_units: 64,
            num_classes,
            spatial_dropout_rate: 0.20,
            internal_rnn_dropout_rate: 0.35,
            dense_dropout: false,
            embedding_trainable: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("embedding_dim", self.embedding_dim),
            ("rnn_units", self.rnn_units),
            ("conv_filters", self.conv_filters),
            ("kernel_size", self.kernel_size),
            ("pool_size", self.pool_size),
            ("dense_units", self.dense_units),
        ];
        for (name, v) in sizes {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if self.num_classes < 2 {
            return Err(Error::Config("num_classes must be >= 2".into()));
        }
        for (name, r) in [
            ("spatial_dropout_rate", self.spatial_dropout_rate),
            ("internal_rnn_dropout_rate", self.internal_rnn_dropout_rate),
        ] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::Config(format!("{name} must be in [0, 1), got {r}")));
            }
        }
        Ok(())
    }

    /// Layer sequence in data-flow order.
    pub fn layers(&self) -> Vec<LayerKind> {
        let v = self.variant;
        let mut out = vec![LayerKind::Embed];
        if v.cnn_first() {
            out.extend([LayerKind::Conv1D, LayerKind::MaxPool]);
        }
        if let Some(b) = v.recurrent() {
            out.push(LayerKind::Recurrent(b));
        } else {
            out.push(LayerKind::GlobalMaxPool);
        }
        if v.cnn_after() {
            out.extend([LayerKind::Conv1D, LayerKind::MaxPool]);
        }
        out.extend([LayerKind::SpatialDropout, LayerKind::Dense]);
        if self.dense_dropout {
            out.push(LayerKind::Dropout);
        }
        out.push(LayerKind::Output);
        out
    }

    /// Shortest input length the convolution and pooling blocks accept.
    pub fn min_sequence_len(&self) -> usize {
        let blocks = usize::from(self.variant.cnn_first()) + usize::from(self.variant.cnn_after());
        let mut t = 1;
        for _ in 0..blocks {
            // conv then pool must leave at least one step: t' = (t - k + 1) / p >= current need
            t = t * self.pool_size + self.kernel_size - 1;
        }
        t
    }
}
