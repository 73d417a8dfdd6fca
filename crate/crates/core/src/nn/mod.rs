//! Tensor layers with exact forward and backward passes.
//!
//! The layer set is closed: 1-D convolution, ReLU, max-pooling, LSTM,
//! dense, dropout, sigmoid, flatten, plus binary cross-entropy. Every layer
//! is generic over [`Scalar`] so the same code runs in `f32` for training
//! and inference and in `f64` for gradient checking.

mod activation;
mod conv;
mod dense;
mod loss;
mod lstm;
mod network;
mod pool;
mod spec;
mod tensor;

use thiserror::Error;

pub use activation::{relu_backward, relu_forward, sigmoid, sigmoid_backward, sigmoid_forward};
pub use conv::{Conv1d, Conv1dGrads};
pub use dense::{Dense, DenseGrads};
pub use loss::{bce, bce_batch, bce_logit_grad, BCE_EPS};
pub use lstm::{Lstm, LstmCache, LstmGrads};
pub use network::{summarize, Cache, Layer, LayerSummary, Network};
pub use pool::{maxpool1d_backward, maxpool1d_forward};
pub use spec::{shape_chain, LayerSpec};
pub use tensor::{Scalar, Tensor};

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("cache mismatch: {0}")]
    Cache(String),
    #[error("label {0} is not binary")]
    Label(u8),
}
