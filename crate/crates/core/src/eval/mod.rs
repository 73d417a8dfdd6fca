//! Detection metrics, ROC analysis, and inference-speed measurement.
//!
//! The positive class is "attack" (label 1) throughout.

mod bench;
mod metrics;
mod report;
mod roc;

use thiserror::Error;

pub use bench::{append_benchmark_log, benchmark, BenchmarkResult, BENCHMARK_LOG_HEADER};
pub use metrics::{confusion, ConfusionMatrix, Rate};
pub use report::{evaluate, EvalReport};
pub use roc::{auc, roc, RocCurve, RocPoint};

use crate::transfer::TransferError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{labels} labels but {predictions} predictions")]
    LengthMismatch { labels: usize, predictions: usize },
    #[error("value {value} at index {index} is not 0 or 1")]
    NonBinary { index: usize, value: u8 },
    #[error("score at index {index} is not finite")]
    BadScore { index: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}
