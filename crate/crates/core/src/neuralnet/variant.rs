use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecurrentKind {
    Lstm,
    Gru,
}

impl RecurrentKind {
    /// Number of stacked gate blocks in the main weight matrix.
    pub(crate) fn gate_blocks(self) -> usize {
        match self {
            RecurrentKind::Lstm => 4,
            RecurrentKind::Gru => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecurrentBlock {
    pub kind: RecurrentKind,
    pub bidirectional: bool,
}

/// The thirteen architectures compared. Hyphenated names list blocks in
/// data-flow order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Cnn,
    Lstm,
    BiLstm,
    Gru,
    BiGru,
    CnnLstm,
    CnnBiLstm,
    CnnGru,
    CnnBiGru,
    LstmCnn,
    BiLstmCnn,
    GruCnn,
    BiGruCnn,
}

impl Variant {
    pub const ALL: [Variant; 13] = [
        Variant::Cnn,
        Variant::Lstm,
        Variant::BiLstm,
        Variant::Gru,
        Variant::BiGru,
        Variant::CnnLstm,
        Variant::CnnBiLstm,
        Variant::CnnGru,
        Variant::CnnBiGru,
        Variant::LstmCnn,
        Variant::BiLstmCnn,
        Variant::GruCnn,
        Variant::BiGruCnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Cnn => "CNN",
            Variant::Lstm => "LSTM",
            Variant::BiLstm => "BiLSTM",
            Variant::Gru => "GRU",
            Variant::BiGru => "BiGRU",
            Variant::CnnLstm => "CNN-LSTM",
            Variant::CnnBiLstm => "CNN-BiLSTM",
            Variant::CnnGru => "CNN-GRU",
            Variant::CnnBiGru => "CNN-BiGRU",
            Variant::LstmCnn => "LSTM-CNN",
            Variant::BiLstmCnn => "BiLSTM-CNN",
            Variant::GruCnn => "GRU-CNN",
            Variant::BiGruCnn => "BiGRU-CNN",
        }
    }

    /// Convolution block before the recurrent block (or alone, for `CNN`).
    pub fn cnn_first(self) -> bool {
        matches!(
            self,
            Variant::Cnn | Variant::CnnLstm | Variant::CnnBiLstm | Variant::CnnGru | Variant::CnnBiGru
        )
    }

    pub fn cnn_after(self) -> bool {
        matches!(
            self,
            Variant::LstmCnn | Variant::BiLstmCnn | Variant::GruCnn | Variant::BiGruCnn
        )
    }

    pub fn recurrent(self) -> Option<RecurrentBlock> {
        use RecurrentKind::*;
        let (kind, bidirectional) = match self {
            Variant::Cnn => return None,
            Variant::Lstm | Variant::CnnLstm | Variant::LstmCnn => (Lstm, false),
            Variant::BiLstm | Variant::CnnBiLstm | Variant::BiLstmCnn => (Lstm, true),
            Variant::Gru | Variant::CnnGru | Variant::GruCnn => (Gru, false),
            Variant::BiGru | Variant::CnnBiGru | Variant::BiGruCnn => (Gru, true),
        };
        Some(RecurrentBlock { kind, bidirectional })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

/// Human-readable layer kinds, as listed by [`super::ModelSpec::layers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Embed,
    Conv1D,
    MaxPool,
    GlobalMaxPool,
    Recurrent(RecurrentBlock),
    SpatialDropout,
    Dense,
    Dropout,
    Output,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerKind::Embed => "Embed",
            LayerKind::Conv1D => "Conv1D",
            LayerKind::MaxPool => "MaxPool",
            LayerKind::GlobalMaxPool => "GlobalMaxPool",
            LayerKind::Recurrent(b) => match (b.kind, b.bidirectional) {
                (RecurrentKind::Lstm, false) => "LSTM",
                (RecurrentKind::Lstm, true) => "BiLSTM",
                (RecurrentKind::Gru, false) => "GRU",
                (RecurrentKind::Gru, true) => "BiGRU",
            },
            LayerKind::SpatialDropout => "SpatialDropout",
            LayerKind::Dense => "Dense",
            LayerKind::Dropout => "Dropout",
            LayerKind::Output => "Output",
        };
        f.write_str(s)
    }
}
