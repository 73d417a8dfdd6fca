//! The DNN, CNN and CNN-LSTM classifiers, their training loop, and scoring.

mod arch;
mod predict;
mod train;

use thiserror::Error;

pub use arch::{build, ArchitectureSpec, Family, Model, DEFAULT_DROPOUT, DEFAULT_INPUT_FEATURES, MIN_CONV_INPUT};
pub use predict::{classify, with_threads, DEFAULT_THRESHOLD};
pub use train::{train, EpochStats, Labeled, TrainConfig, TrainReport};

use crate::nn::NnError;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{family} needs at least {min} input features, got {input_features}")]
    InputTooShort { family: Family, input_features: usize, min: usize },
    #[error("empty {0}")]
    EmptyData(String),
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
}
