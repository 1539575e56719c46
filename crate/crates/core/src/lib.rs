//! Offensive-language classification workbench: tweet normalization,
//! vocabulary and embedding handling, class-imbalance treatment, CNN/RNN
//! classifiers with hand-written backpropagation, metrics, and the
//! cross-validation harness that drives architecture comparisons.

pub mod balance;
pub mod data;
pub mod error;
pub mod fixture;
pub mod harness;
pub mod metrics;
pub mod neuralnet;
pub mod preprocess;
pub mod representation;
pub mod store;
pub mod tables;

pub use error::{Error, Result};
