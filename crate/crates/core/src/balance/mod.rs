//! Class-imbalance countermeasures: loss re-weighting and SMOTE oversampling.

mod smote;
mod weights;

pub use smote::{
    nearest_neighbors, round_to_token_space, smote, smote_with_rng, SmoteConfig, SmoteTarget, DEFAULT_K_NEIGHBORS,
};
pub use weights::{class_counts, class_weights, class_weights_from_counts, ClassWeightTable};
