//! The portable model bundle and the frozen inference engine built from it.
//!
//! A bundle carries everything a target site needs to score raw flow rows:
//! the architecture and weights, the selected feature list, the scaler, the
//! categorical encoding and the schema. Weights are stored as raw
//! little-endian `f32`, so a round trip is bit-exact.

mod bundle;
mod engine;

use thiserror::Error;

pub use bundle::{decode_bundle, export_bundle, load_bundle, Bundle, BundleHeader, ExportSummary, FORMAT_VERSION, MAGIC};
pub use engine::InferenceEngine;

use crate::dataset::DatasetError;
use crate::features::FeatureError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model bundle (bad magic bytes)")]
    BadMagic,
    #[error("unsupported bundle version {0}")]
    UnsupportedVersion(u32),
    #[error("bundle length mismatch: expected {expected} bytes, found {actual}")]
    LengthMismatch { expected: u64, actual: u64 },
    #[error("malformed bundle header: {0}")]
    HeaderSchema(String),
    #[error("bundle is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
