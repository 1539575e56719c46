//! Layer primitives with explicit backward passes, the variant factory,
//! Adam, and checkpoint persistence.

mod adam;
mod checkpoint;
mod model;
mod ops;
mod params;
mod recurrent;
mod spec;
mod train;
mod variant;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, Manifest, TensorInfo, FORMAT_VERSION};
pub use model::{Mode, Model};
pub use ops::{
    conv1d, conv1d_grad, dense_softmax, maxpool1d, maxpool1d_grad, softmax, spatial_dropout, weighted_cross_entropy,
    PROB_FLOOR,
};
pub use params::{Parameters, Tensor};
pub use recurrent::{recurrent_cell_step, run_recurrent, CellState, CellWeights};
pub use spec::ModelSpec;
pub use train::{predict_batch, train_step, Trainer, DEFAULT_BATCH_SIZE};
pub use variant::{LayerKind, RecurrentBlock, RecurrentKind, Variant};
